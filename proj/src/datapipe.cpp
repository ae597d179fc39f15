#include "shht/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "shht/errors.hpp"
#include "shht/png_io.hpp"

namespace fs = std::filesystem;

namespace shht {

void DatasetMode::validate() const {
    if (ratio < 1 || patch_rgb != ratio * patch_out) {
        throw InvalidArgument("DatasetMode: patch_rgb must equal ratio * patch_out");
    }
    if (rgb_gsd <= 0 || lidar_gsd <= 0 || high_cut <= 0) {
        throw InvalidArgument("DatasetMode: gsd and high_cut must be positive");
    }
}

DatasetMode DatasetMode::manchester() {
    return {"manchester_buildings", 0.25, 1.0, 4, 256, 64, 1.5, 100.0};
}

DatasetMode DatasetMode::dfc() {
    return {"dfc_full", 0.05, 0.5, 10, 520, 52, std::nullopt, 100.0};
}

DatasetMode DatasetMode::synthetic() {
    return {"synthetic", 0.25, 1.0, 4, 64, 16, std::nullopt, 100.0};
}

DatasetMode DatasetMode::by_name(const std::string& n) {
    if (n == "manchester_buildings" || n == "manchester") return manchester();
    if (n == "dfc_full" || n == "dfc") return dfc();
    if (n == "synthetic") return synthetic();
    throw InvalidArgument("unknown dataset mode: " + n);
}

std::vector<int> Dataset::indices_of(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < catalog.records.size(); ++i) {
        if (catalog.records[i].split == s) out.push_back(static_cast<int>(i));
    }
    return out;
}

RasterGrid compute_height_ground_truth(const RasterGrid& dsm, const RasterGrid& dtm,
                                       const DatasetMode& mode) {
    if (dsm.height != dtm.height || dsm.width != dtm.width) {
        throw InvalidArgument("height ground truth: DSM/DTM dimensions differ");
    }
    if (dsm.gsd != dtm.gsd) {
        throw InvalidArgument("height ground truth: DSM/DTM gsd differ");
    }
    RasterGrid h(dsm.height, dsm.width, dsm.gsd);
    h.origin = dsm.origin;
    for (std::size_t i = 0; i < dsm.size(); ++i) {
        if (!dsm.valid[i] || !dtm.valid[i]) {
            h.valid[i] = 0;
            h.values[i] = RasterGrid::kNoData;
            continue;
        }
        float v = dsm.values[i] - dtm.values[i];
        if (v < 0.0f) v = 0.0f;
        if (mode.low_cut && v < static_cast<float>(*mode.low_cut)) v = 0.0f;
        h.values[i] = v;
    }
    return h;
}

PatchValidity validate_patch(const RasterGrid& h, const DatasetMode& mode) {
    if (h.height != mode.patch_out || h.width != mode.patch_out) {
        throw InvalidArgument("validate_patch: target is not patch_out sized");
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!h.valid[i]) return {false, "nodata"};
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h.values[i] > static_cast<float>(mode.high_cut)) return {false, "extreme"};
    }
    return {true, ""};
}

Dataset build_dataset(const RgbImage& rgb, const RasterGrid& dsm, const RasterGrid& dtm,
                      const DatasetMode& mode, int stride, const std::string& source_id) {
    mode.validate();
    if (stride < 1) throw InvalidArgument("build_dataset: stride must be >= 1");
    if (stride % mode.ratio != 0) {
        throw InvalidArgument("build_dataset: stride must be a multiple of the ratio");
    }
    if (rgb.height != mode.ratio * dsm.height || rgb.width != mode.ratio * dsm.width) {
        throw InvalidArgument("build_dataset: RGB dims must be ratio * elevation dims");
    }

    const RasterGrid height = compute_height_ground_truth(dsm, dtm, mode);

    Dataset ds;
    ds.catalog.mode = mode;
    for (int r = 0; r + mode.patch_rgb <= rgb.height; r += stride) {
        for (int c = 0; c + mode.patch_rgb <= rgb.width; c += stride) {
            PatchSample s;
            s.source_id = source_id;
            s.off_row = r;
            s.off_col = c;
            s.rgb = crop(rgb, {r, c, mode.patch_rgb, mode.patch_rgb});
            s.target = crop(height, {r / mode.ratio, c / mode.ratio, mode.patch_out, mode.patch_out});
            const PatchValidity v = validate_patch(s.target, mode);
            s.valid = v.valid;

            PatchRecord rec;
            rec.source_id = source_id;
            rec.off_row = r;
            rec.off_col = c;
            rec.valid = v.valid;
            rec.reject_reason = v.reason;
            ds.catalog.records.push_back(std::move(rec));
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

PatchCatalog build_catalog(const RgbImage& rgb, const RasterGrid& dsm, const RasterGrid& dtm,
                           const DatasetMode& mode, int stride, const std::string& source_id) {
    return build_dataset(rgb, dsm, dtm, mode, stride, source_id).catalog;
}

void split_catalog(PatchCatalog& catalog, std::uint64_t seed, SplitRatios ratios) {
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw InvalidArgument("split_catalog: ratios must sum to 1");
    }
    std::vector<int> idx;
    for (std::size_t i = 0; i < catalog.records.size(); ++i) {
        catalog.records[i].split = Split::none;
        if (catalog.records[i].valid) idx.push_back(static_cast<int>(i));
    }
    if (idx.empty()) throw EmptyInput("split_catalog: no valid records");

    Rng rng = Rng::derive(seed, 0x73706c6974ULL);  // split stream
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
        const std::size_t j = rng.below(i + 1);
        std::swap(idx[i], idx[j]);
    }

    const auto n = static_cast<double>(idx.size());
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * n + 0.5));
    const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * n + 0.5));
    if (n_val + n_test > idx.size()) throw InvalidArgument("split_catalog: ratios leave no train data");
    const std::size_t n_train = idx.size() - n_val - n_test;

    for (std::size_t i = 0; i < idx.size(); ++i) {
        Split s = Split::train;
        if (i >= n_train + n_val) s = Split::test;
        else if (i >= n_train) s = Split::val;
        catalog.records[idx[i]].split = s;
    }
}

void split_dataset(Dataset& ds, std::uint64_t seed, SplitRatios ratios) {
    split_catalog(ds.catalog, seed, ratios);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        ds.samples[i].split = ds.catalog.records[i].split;
    }
}

PatchSample augment_sample(const PatchSample& s, Rng& rng, const AugmentConfig& cfg) {
    PatchSample out = s;

    if (cfg.rotate) {
        const int k = static_cast<int>(rng.below(4));
        if (k != 0) {
            out.rgb = rotate90(out.rgb, k);
            out.target = rotate90(out.target, k);
        }
    }

    if (cfg.photometric) {
        double shift[3];
        for (double& v : shift) v = rng.uniform(-cfg.shift_mag, cfg.shift_mag);
        const double factor = rng.uniform(cfg.contrast_lo, cfg.contrast_hi);

        const std::size_t n = static_cast<std::size_t>(out.rgb.height) * out.rgb.width;
        for (int ch = 0; ch < 3; ++ch) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += out.rgb.data[3 * i + ch];
            mean = mean / static_cast<double>(n) + shift[ch];
            for (std::size_t i = 0; i < n; ++i) {
                const double shifted = out.rgb.data[3 * i + ch] + shift[ch];
                const double v = mean + factor * (shifted - mean);
                out.rgb.data[3 * i + ch] =
                    static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
            }
        }
    }

    out.shadow = compute_shadow_map(out.rgb, cfg.shadow);
    return out;
}

Tensor assemble_input(const RgbImage& rgb, const ShadowParams& params, bool use_shadow) {
    const int C = use_shadow ? 4 : 3;
    Tensor x(1, rgb.height, rgb.width, C);
    const std::size_t n = static_cast<std::size_t>(rgb.height) * rgb.width;
    if (use_shadow) {
        const ShadowMap sm = compute_shadow_map(rgb, params);
        for (std::size_t i = 0; i < n; ++i) {
            x.data[i * 4 + 0] = rgb.data[3 * i + 0];
            x.data[i * 4 + 1] = rgb.data[3 * i + 1];
            x.data[i * 4 + 2] = rgb.data[3 * i + 2];
            x.data[i * 4 + 3] = static_cast<float>(sm.data[i]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            x.data[i * 3 + 0] = rgb.data[3 * i + 0];
            x.data[i * 3 + 1] = rgb.data[3 * i + 1];
            x.data[i * 3 + 2] = rgb.data[3 * i + 2];
        }
    }
    return x;
}

Batch assemble_batch(const Dataset& ds, const std::vector<int>& indices, bool augment,
                     const AugmentConfig& aug, const ShadowParams& shadow, bool use_shadow,
                     std::uint64_t seed, int epoch) {
    if (indices.empty()) throw EmptyInput("assemble_batch: no samples");
    const DatasetMode& mode = ds.catalog.mode;
    const int B = static_cast<int>(indices.size());
    const int C = use_shadow ? 4 : 3;

    Batch batch;
    batch.x = Tensor(B, mode.patch_rgb, mode.patch_rgb, C);
    batch.target = Tensor(B, mode.patch_out, mode.patch_out, 1);
    batch.mask = Tensor(B, mode.patch_out, mode.patch_out, 1);

    const std::size_t in_stride = static_cast<std::size_t>(mode.patch_rgb) * mode.patch_rgb * C;
    const std::size_t out_stride = static_cast<std::size_t>(mode.patch_out) * mode.patch_out;

#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < B; ++b) {
        const PatchSample& base = ds.samples[indices[b]];
        Tensor x1;
        const RasterGrid* target = nullptr;
        PatchSample augmented;
        if (augment) {
            // Stream keyed by (seed, epoch, dataset index): batch composition
            // and worker count cannot change any sample's augmentation.
            Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(epoch),
                                  static_cast<std::uint64_t>(indices[b]));
            augmented = augment_sample(base, rng, aug);
            x1 = assemble_input(augmented.rgb, aug.shadow, use_shadow);
            target = &augmented.target;
        } else {
            x1 = assemble_input(base.rgb, shadow, use_shadow);
            target = &base.target;
        }
        std::copy(x1.data.begin(), x1.data.end(), batch.x.data.begin() + b * in_stride);
        for (std::size_t i = 0; i < out_stride; ++i) {
            batch.target.data[b * out_stride + i] = target->valid[i] ? target->values[i] : 0.0f;
            batch.mask.data[b * out_stride + i] = target->valid[i] ? 1.0f : 0.0f;
        }
    }
    return batch;
}

namespace {

std::string record_stem(const PatchRecord& rec, std::size_t idx) {
    return "patch_" + std::to_string(idx) + "_" + rec.source_id + "_r" +
           std::to_string(rec.off_row) + "_c" + std::to_string(rec.off_col);
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
    if (ds.samples.size() != ds.catalog.records.size()) {
        throw InvalidArgument("save_dataset: catalog and samples misaligned");
    }
    fs::create_directories(dir);

    nlohmann::json j;
    j["schema_version"] = 1;
    const DatasetMode& m = ds.catalog.mode;
    j["mode"] = {{"name", m.name},          {"rgb_gsd", m.rgb_gsd}, {"lidar_gsd", m.lidar_gsd},
                 {"ratio", m.ratio},        {"patch_rgb", m.patch_rgb},
                 {"patch_out", m.patch_out}, {"high_cut", m.high_cut}};
    if (m.low_cut) j["mode"]["low_cut"] = *m.low_cut;

    auto& records = j["records"] = nlohmann::json::array();
    for (std::size_t i = 0; i < ds.catalog.records.size(); ++i) {
        const PatchRecord& rec = ds.catalog.records[i];
        nlohmann::json e = {{"source_id", rec.source_id},
                            {"offset", {rec.off_row, rec.off_col}},
                            {"split", to_string(rec.split)},
                            {"valid", rec.valid},
                            {"stem", record_stem(rec, i)}};
        if (!rec.valid) e["reject_reason"] = rec.reject_reason;
        records.push_back(std::move(e));

        const std::string stem = (fs::path(dir) / record_stem(rec, i)).string();
        write_png_rgb(stem + "_rgb.png", ds.samples[i].rgb);
        write_raster_png16(stem + "_tgt.png", ds.samples[i].target);
    }

    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw IoError("save_dataset: cannot write manifest in " + dir);
    out << j.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw IoError("load_dataset: no manifest in " + dir);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("schema_version", 0) != 1) {
        throw IoError("load_dataset: unsupported manifest schema");
    }

    Dataset ds;
    ds.catalog.storage_root = dir;
    const auto& m = j.at("mode");
    DatasetMode mode;
    mode.name = m.at("name").get<std::string>();
    mode.rgb_gsd = m.at("rgb_gsd").get<double>();
    mode.lidar_gsd = m.at("lidar_gsd").get<double>();
    mode.ratio = m.at("ratio").get<int>();
    mode.patch_rgb = m.at("patch_rgb").get<int>();
    mode.patch_out = m.at("patch_out").get<int>();
    mode.high_cut = m.at("high_cut").get<double>();
    if (m.contains("low_cut")) mode.low_cut = m.at("low_cut").get<double>();
    mode.validate();
    ds.catalog.mode = mode;

    for (const auto& e : j.at("records")) {
        PatchRecord rec;
        rec.source_id = e.at("source_id").get<std::string>();
        rec.off_row = e.at("offset")[0].get<int>();
        rec.off_col = e.at("offset")[1].get<int>();
        rec.split = split_from_string(e.at("split").get<std::string>());
        rec.valid = e.at("valid").get<bool>();
        if (e.contains("reject_reason")) rec.reject_reason = e.at("reject_reason").get<std::string>();

        const std::string stem = (fs::path(dir) / e.at("stem").get<std::string>()).string();
        PatchSample s;
        s.rgb = read_png_rgb(stem + "_rgb.png");
        s.target = read_raster_png16(stem + "_tgt.png");
        s.source_id = rec.source_id;
        s.off_row = rec.off_row;
        s.off_col = rec.off_col;
        s.split = rec.split;
        s.valid = rec.valid;

        ds.catalog.records.push_back(std::move(rec));
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace shht
