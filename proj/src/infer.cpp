#include "shht/infer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "shht/errors.hpp"

namespace shht {

TileLayout plan_tiles(int height, int width, int patch, int ratio) {
    if (height < 1 || width < 1) throw InvalidArgument("plan_tiles: empty image");
    if (patch < 1 || ratio < 1 || patch % ratio != 0) {
        throw InvalidArgument("plan_tiles: patch must be a positive multiple of ratio");
    }
    TileLayout t;
    t.patch = patch;
    t.ratio = ratio;
    t.in_height = height;
    t.in_width = width;
    t.pad_bottom = (patch - height % patch) % patch;
    t.pad_right = (patch - width % patch) % patch;
    t.grid_rows = (height + t.pad_bottom) / patch;
    t.grid_cols = (width + t.pad_right) / patch;
    t.out_height = height / ratio;
    t.out_width = width / ratio;
    return t;
}

namespace {

inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

RgbImage reflect_pad(const RgbImage& img, int pad_bottom, int pad_right) {
    if (pad_bottom == 0 && pad_right == 0) return img;
    RgbImage out(img.height + pad_bottom, img.width + pad_right);
    for (int r = 0; r < out.height; ++r) {
        const int sr = reflect_index(r, img.height);
        for (int c = 0; c < out.width; ++c) {
            const int sc = reflect_index(c, img.width);
            for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = img.at(sr, sc, ch);
        }
    }
    return out;
}

}  // namespace

RasterGrid predict_full(const Network& net, const RgbImage& rgb, const ShadowParams& sp,
                        double rgb_gsd) {
    const int patch = net.spec().input_size;
    const int out_patch = net.spec().output_size;
    if (patch <= 0 || out_patch <= 0 || patch % out_patch != 0) {
        throw InvalidArgument("predict_full: model preset is not tileable");
    }
    const int ratio = patch / out_patch;
    const bool use_shadow = net.spec().input_channels == 4;

    const TileLayout layout = plan_tiles(rgb.height, rgb.width, patch, ratio);
    const RgbImage padded = reflect_pad(rgb, layout.pad_bottom, layout.pad_right);

    RasterGrid canvas(layout.grid_rows * out_patch, layout.grid_cols * out_patch,
                      static_cast<float>(rgb_gsd * ratio));
    for (int tr = 0; tr < layout.grid_rows; ++tr) {
        for (int tc = 0; tc < layout.grid_cols; ++tc) {
            const RgbImage tile = crop(padded, {tr * patch, tc * patch, patch, patch});
            const Tensor x = assemble_input(tile, sp, use_shadow);
            const Tensor y = net.forward_eval(x);
            for (int r = 0; r < out_patch; ++r) {
                for (int c = 0; c < out_patch; ++c) {
                    canvas.at(tr * out_patch + r, tc * out_patch + c) =
                        std::max(0.0f, y.at(0, r, c, 0));
                }
            }
        }
    }
    return crop(canvas, {0, 0, layout.out_height, layout.out_width});
}

EvalReport evaluate(const Network& net, const Dataset& ds, Split split, const ShadowParams& sp) {
    const std::vector<int> idx = ds.indices_of(split);
    if (idx.empty()) throw EmptyInput("evaluate: empty split");
    const bool use_shadow = net.spec().input_channels == 4;
    if (ds.catalog.mode.patch_rgb != net.spec().input_size) {
        throw InvalidArgument("evaluate: dataset patch size does not match model input");
    }

    struct Acc {
        double abs = 0.0, sq = 0.0;
        std::int64_t n = 0;
    };
    Acc total;
    std::map<std::string, Acc> per_image;

    constexpr int kBatch = 16;
    for (std::size_t pos = 0; pos < idx.size(); pos += kBatch) {
        const std::vector<int> chunk(idx.begin() + pos,
                                     idx.begin() + std::min(idx.size(), pos + kBatch));
        AugmentConfig no_aug;
        const Batch batch = assemble_batch(ds, chunk, false, no_aug, sp, use_shadow, 0, 0);
        const Tensor pred = net.forward_eval(batch.x);
        const std::size_t per = static_cast<std::size_t>(pred.h) * pred.w;
        for (std::size_t b = 0; b < chunk.size(); ++b) {
            Acc& img = per_image[ds.samples[chunk[b]].source_id];
            for (std::size_t i = 0; i < per; ++i) {
                const std::size_t k = b * per + i;
                if (batch.mask.data[k] == 0.0f) continue;
                const double p = std::max(0.0f, pred.data[k]);
                const double d = p - batch.target.data[k];
                total.abs += std::abs(d);
                total.sq += d * d;
                ++total.n;
                img.abs += std::abs(d);
                img.sq += d * d;
                ++img.n;
            }
        }
    }
    if (total.n == 0) throw EmptyInput("evaluate: split has no valid pixels");

    EvalReport rep;
    rep.mode = ds.catalog.mode.name;
    rep.used_shadow_channel = use_shadow;
    rep.n_pixels = total.n;
    rep.mae = total.abs / static_cast<double>(total.n);
    rep.rmse = std::sqrt(total.sq / static_cast<double>(total.n));
    for (const auto& [id, acc] : per_image) {
        ImageError e;
        e.id = id;
        e.n_pixels = acc.n;
        e.mae = acc.n ? acc.abs / static_cast<double>(acc.n) : 0.0;
        e.rmse = acc.n ? std::sqrt(acc.sq / static_cast<double>(acc.n)) : 0.0;
        rep.per_image.push_back(std::move(e));
    }
    if (rep.rmse + 1e-12 < rep.mae) {
        throw std::logic_error("evaluate: rmse < mae, metric accumulation is broken");
    }
    return rep;
}

std::string eval_report_json(const EvalReport& rep) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["mode"] = rep.mode;
    j["used_shadow_channel"] = rep.used_shadow_channel;
    j["mae_m"] = rep.mae;
    j["rmse_m"] = rep.rmse;
    j["n_pixels"] = rep.n_pixels;
    auto& arr = j["per_image"] = nlohmann::json::array();
    for (const ImageError& e : rep.per_image) {
        arr.push_back({{"id", e.id}, {"mae_m", e.mae}, {"rmse_m", e.rmse}, {"n_pixels", e.n_pixels}});
    }
    return j.dump(2);
}

}  // namespace shht
