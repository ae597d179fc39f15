// Acceptance suite: runs every acceptance criterion end to end and prints
// one [PASS]/[FAIL]/[FLAG] line per criterion. Exit code = number of hard
// failures. --only N[,M...] restricts the run; --cache DIR reuses trained
// models across invocations (development convenience; the ctest entry runs
// without it).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shht/datapipe.hpp"
#include "shht/infer.hpp"
#include "shht/net.hpp"
#include "shht/probe.hpp"
#include "shht/shadow.hpp"
#include "shht/synthcity.hpp"
#include "shht/train.hpp"
#include "support/shadow_oracle.hpp"

namespace fs = std::filesystem;
using namespace shht;
using clock_type = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    bool soft = false;  // soft criteria print FLAG instead of FAIL
    std::string detail;
};

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

Tensor random_input(int n, int size, int channels, std::uint64_t seed) {
    Rng rng(seed);
    Tensor x(n, size, size, channels);
    const std::size_t pixels = x.size() / channels;
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int ch = 0; ch < std::min(3, channels); ++ch) {
            x.data[i * channels + ch] = static_cast<float>(rng.below(256));
        }
        if (channels == 4) x.data[i * channels + 3] = static_cast<float>(rng.below(2));
    }
    return x;
}

// ---------------------------------------------------------------- lab ----
// Shared artifacts for criteria 7, 8 and 11: the 2000-patch synthetic
// catalog and six trained reduced-preset models (3 seeds x shadow on/off).

struct TrainedRun {
    Checkpoint best;
    double test_mae = 0.0;
    double test_rmse = 0.0;
};

struct Lab {
    static constexpr std::uint64_t kSeeds[3] = {2025, 2026, 2027};
    static constexpr int kMaxEpochs = 12;

    std::string cache_dir;
    std::optional<Dataset> dataset;
    std::map<std::string, TrainedRun> runs;

    SceneParams scene_template(std::uint64_t seed) const {
        SceneParams p;
        p.world = 320;
        p.seed = seed;
        return p;
    }

    const Dataset& catalog() {
        if (!dataset) {
            std::printf("  [lab] generating 80-scene synthetic catalog...\n");
            std::fflush(stdout);
            dataset = generate_dataset(scene_template(kSeeds[0]), 80, DatasetMode::synthetic(), 64);
        }
        return *dataset;
    }

    TrainConfig config(std::uint64_t seed, bool with_shadow) const {
        TrainConfig cfg;
        cfg.seed = seed;
        cfg.batch_size = 32;
        cfg.max_epochs = kMaxEpochs;
        cfg.plateau_patience = 3;
        cfg.use_shadow_channel = with_shadow;
        return cfg;
    }

    const TrainedRun& run(std::uint64_t seed, bool with_shadow) {
        const std::string key =
            std::to_string(seed) + (with_shadow ? "_shadow" : "_noshadow");
        auto it = runs.find(key);
        if (it != runs.end()) return it->second;

        TrainedRun r;
        const std::string cache_file =
            cache_dir.empty() ? "" : (fs::path(cache_dir) / (key + ".shht")).string();
        if (!cache_file.empty() && fs::exists(cache_file)) {
            r.best = load_checkpoint(cache_file);
            std::printf("  [lab] reusing cached run %s\n", key.c_str());
        } else {
            std::printf("  [lab] training %s (reduced preset, %d epochs max)...\n", key.c_str(),
                        kMaxEpochs);
            std::fflush(stdout);
            const auto t0 = clock_type::now();
            Network net(make_preset("reduced", with_shadow));
            net.init_params(seed);
            const FitResult res = fit(net, catalog(), config(seed, with_shadow));
            r.best = res.best;
            std::printf("  [lab] %s: best val MAE %.3f m at epoch %d (%.0f s)\n", key.c_str(),
                        r.best.best_val, r.best.epoch, seconds_since(t0));
            if (!cache_file.empty()) {
                fs::create_directories(cache_dir);
                save_checkpoint(r.best, cache_file);
            }
        }
        const EvalReport rep = evaluate(r.best.net, catalog(), Split::test, ShadowParams{});
        r.test_mae = rep.mae;
        r.test_rmse = rep.rmse;
        std::printf("  [lab] %s: test MAE %.3f m RMSE %.3f m\n", key.c_str(), r.test_mae,
                    r.test_rmse);
        std::fflush(stdout);
        return runs.emplace(key, std::move(r)).first->second;
    }
};

// ------------------------------------------------------------ criteria ----

Outcome criterion1_shapes() {
    Outcome out;
    std::ostringstream detail;
    bool ok = true;
    for (const char* preset : {"manchester", "dfc"}) {
        Network net(make_preset(preset));
        net.init_params(1);
        const int in = net.spec().input_size;
        const Tensor x = random_input(1, in, 4, 11);
        const auto t0 = clock_type::now();
        const Tensor y = net.forward_eval(x);
        const double dt = seconds_since(t0);
        const bool shape_ok = y.n == 1 && y.h == net.spec().output_size &&
                              y.w == net.spec().output_size && y.c == 1;
        bool finite = true;
        for (float v : y.data) finite &= std::isfinite(v);
        ok = ok && shape_ok && finite && dt < 120.0;
        detail << preset << " 1x" << in << "x" << in << "x4 -> 1x" << y.h << "x" << y.w << "x"
               << y.c << " in " << std::fixed << dt << " s; ";
    }
    out.pass = ok;
    out.detail = detail.str();
    return out;
}

Outcome criterion2_parameters() {
    Outcome out;
    const std::int64_t man = Network(make_preset("manchester")).count_trainable();
    const std::int64_t dfc = Network(make_preset("dfc")).count_trainable();
    const bool man_ok = man >= 125000000 / 1.5 && man <= 125000000 * 1.5;
    const bool dfc_ok = dfc >= 104000000 / 1.5 && dfc <= 104000000 * 1.5;
    std::ostringstream detail;
    detail << "manchester " << man << " (claim 125M, ratio " << std::fixed
           << 125.0e6 / static_cast<double>(man) << (man_ok ? ", ok" : ", out of range")
           << "); dfc " << dfc << " (claim 104M, ratio " << 104.0e6 / static_cast<double>(dfc)
           << (dfc_ok ? ", ok" : ", out of range") << ")";
    if (!dfc_ok) {
        detail << " -- the published table's channel widths and the 104M claim are mutually"
                  " inconsistent; the table (pinned by criterion 1) wins, see ledger";
    }
    out.pass = man_ok && dfc_ok;
    out.detail = detail.str();
    return out;
}

Outcome criterion3_pixel_shuffle() {
    Outcome out;
    Rng rng(33);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const int s = 1 + static_cast<int>(rng.below(3));
        const int cb = 1 + static_cast<int>(rng.below(6));
        const int n = 1 + static_cast<int>(rng.below(2));
        const int h = 1 + static_cast<int>(rng.below(6));
        const int w = 1 + static_cast<int>(rng.below(6));
        Tensor x(n, h, w, s * s * cb);
        for (auto& v : x.data) v = static_cast<float>(rng.uniform(-10, 10));
        const Tensor y = kernels::pixel_shuffle(x, s);
        if (!(y.h == h * s && y.w == w * s && y.c == cb)) return {false, false, "bad shape"};
        const Tensor back = kernels::pixel_unshuffle(y, s);
        if (back.data != x.data) return {false, false, "round trip not bit-exact"};
        auto a = x.data, b = y.data;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) return {false, false, "value multiset changed"};
        ++checked;
    }
    {
        // the deepest decoder rearrangement of the 256-input preset
        Tensor x(1, 16, 16, 2048);
        Rng r2(34);
        for (auto& v : x.data) v = static_cast<float>(r2.uniform(-1, 1));
        const Tensor y = kernels::pixel_shuffle(x, 2);
        if (!(y.h == 32 && y.w == 32 && y.c == 512)) return {false, false, "16x16x2048 shape"};
        if (kernels::pixel_unshuffle(y, 2).data != x.data) {
            return {false, false, "16x16x2048 round trip"};
        }
        ++checked;
    }
    out.pass = true;
    out.detail = std::to_string(checked) + " shapes round-tripped bit-exactly";
    return out;
}

Outcome criterion4_shadow_oracle() {
    Outcome out;
    const ShadowParams p;  // table defaults: stretch 2-98, blur 1.0, threshold 15
    for (int i = 0; i < 100; ++i) {
        Rng rng(4000 + i);
        RgbImage img(64, 64);
        for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
        const ShadowMap got = compute_shadow_map(img, p);
        const ShadowMap want = testutil::oracle_shadow_map(img, p);
        if (got.data != want.data) {
            return {false, false, "mismatch with independent reference at image " +
                                      std::to_string(i)};
        }
        if (i < 20) {
            for (int k = 1; k < 4; ++k) {
                if (compute_shadow_map(rotate90(img, k), p).data != rotate90(got, k).data) {
                    return {false, false, "rotation equivariance broken at k=" +
                                              std::to_string(k)};
                }
            }
        }
    }
    out.pass = true;
    out.detail = "100 images bit-exact vs independent reference; k=1..3 equivariance exact";
    return out;
}

Outcome criterion5_gradients() {
    Outcome out;
    Network fnet(make_preset("micro"));
    fnet.init_params(55);
    NetworkT<double> net = to_double(fnet);

    const Tensor xf = random_input(2, 64, 4, 56);
    TensorT<double> x = tensor_cast<double>(xf);

    // scalar functional: weighted sum of outputs
    Rng wr(57);
    TensorT<double> wsum(2, 16, 16, 1);
    for (auto& v : wsum.data) v = wr.uniform(-1, 1);
    auto phi = [&](NetworkT<double>& m, const TensorT<double>& in) {
        const TensorT<double> y = m.forward_train(in, false);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * wsum.data[i];
        return s;
    };

    // analytic gradients
    phi(net, x);
    net.backward(wsum);
    const TensorT<double> dx = net.input_grad();
    std::vector<TensorT<double>> param_grads;
    for (const auto& p : net.params()) param_grads.push_back(p.grad);

    const double h = 1e-5;
    Rng pick(58);
    int pass = 0, total = 0;
    double worst = 0.0;

    // 100 input coordinates
    for (int t = 0; t < 100; ++t) {
        const std::size_t i = pick.below(x.size());
        TensorT<double> xp = x, xm = x;
        xp.data[i] += h;
        xm.data[i] -= h;
        const double fd = (phi(net, xp) - phi(net, xm)) / (2 * h);
        const double a = dx.data[i];
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
        worst = std::max(worst, rel);
        pass += rel <= 1e-2;
        ++total;
    }
    // 100 parameter coordinates across trainable tensors
    std::vector<int> trainable;
    for (std::size_t i = 0; i < net.params().size(); ++i) {
        if (net.params()[i].trainable) trainable.push_back(static_cast<int>(i));
    }
    for (int t = 0; t < 100; ++t) {
        const int pi = trainable[pick.below(trainable.size())];
        auto& slot = net.params()[pi].value;
        const std::size_t i = pick.below(slot.size());
        const double keep = slot.data[i];
        slot.data[i] = keep + h;
        const double fp = phi(net, x);
        slot.data[i] = keep - h;
        const double fm = phi(net, x);
        slot.data[i] = keep;
        const double fd = (fp - fm) / (2 * h);
        const double a = param_grads[pi].data[i];
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
        worst = std::max(worst, rel);
        pass += rel <= 1e-2;
        ++total;
    }

    std::ostringstream detail;
    detail << pass << "/" << total << " coordinates within 1e-2 (worst rel err " << std::scientific
           << worst << ")";
    out.pass = pass >= 190;  // >= 95% of 200
    out.detail = detail.str();
    return out;
}

Outcome criterion6_overfit() {
    Outcome out;
    SceneParams p;
    p.world = 128;
    p.n_buildings = 2;
    p.seed = 66;
    const Dataset ds = generate_dataset(p, 2, DatasetMode::synthetic(), 64);
    std::vector<int> idx;
    for (int i = 0; i < 8; ++i) idx.push_back(i);
    AugmentConfig no_aug;
    const Batch batch = assemble_batch(ds, idx, false, no_aug, ShadowParams{}, true, 0, 0);

    Network net(make_preset("micro"));
    net.init_params(31);
    AdamState opt;
    double first = -1.0, last = 0.0;
    int steps = 0;
    for (; steps < 1000; ++steps) {
        last = train_step(net, batch.x, batch.target, batch.mask, opt, 1e-4);
        if (first < 0) first = last;
        if (last <= 0.1 * first) {
            ++steps;
            break;
        }
    }
    std::ostringstream detail;
    detail << "MAE " << std::fixed << first << " -> " << last << " m (ratio " << last / first
           << ") after " << steps << " steps";
    out.pass = last <= 0.1 * first;
    out.detail = detail.str();
    return out;
}

double constant_predictor_mae(const Dataset& ds) {
    // best constant = median of train-set target heights, computed before
    // training; scored on the test split
    std::vector<float> train_vals;
    for (int i : ds.indices_of(Split::train)) {
        const RasterGrid& t = ds.samples[i].target;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t.valid[k]) train_vals.push_back(t.values[k]);
        }
    }
    std::sort(train_vals.begin(), train_vals.end());
    const float median = train_vals[train_vals.size() / 2];

    double sum = 0.0;
    std::int64_t n = 0;
    for (int i : ds.indices_of(Split::test)) {
        const RasterGrid& t = ds.samples[i].target;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (!t.valid[k]) continue;
            sum += std::abs(static_cast<double>(median) - t.values[k]);
            ++n;
        }
    }
    return sum / static_cast<double>(n);
}

Outcome criterion7_end_to_end(Lab& lab) {
    Outcome out;
    const Dataset& ds = lab.catalog();
    int valid = 0, train_n = 0, val_n = 0, test_n = 0;
    for (const auto& r : ds.catalog.records) {
        valid += r.valid;
        train_n += r.split == Split::train;
        val_n += r.split == Split::val;
        test_n += r.split == Split::test;
    }
    if (valid != 2000 || train_n != 1400 || val_n != 300 || test_n != 300) {
        return {false, false,
                "catalog is not 1400/300/300 (" + std::to_string(train_n) + "/" +
                    std::to_string(val_n) + "/" + std::to_string(test_n) + ")"};
    }
    const double oracle = constant_predictor_mae(ds);
    const TrainedRun& run = lab.run(Lab::kSeeds[0], true);
    std::ostringstream detail;
    detail << std::fixed << "test MAE " << run.test_mae << " m vs constant-median oracle "
           << oracle << " m (bar " << 0.5 * oracle << ")";
    out.pass = run.test_mae < 0.5 * oracle;
    out.detail = detail.str();
    return out;
}

Outcome criterion8_ablation(Lab& lab) {
    Outcome out;
    out.soft = true;
    std::vector<double> with, without;
    for (std::uint64_t seed : Lab::kSeeds) {
        with.push_back(lab.run(seed, true).test_rmse);
        without.push_back(lab.run(seed, false).test_rmse);
    }
    auto median3 = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[1];
    };
    const double m_with = median3(with), m_without = median3(without);
    std::ostringstream detail;
    detail << std::fixed << "median test RMSE with shadow " << m_with << " m vs without "
           << m_without << " m (";
    for (std::size_t i = 0; i < 3; ++i) {
        detail << "s" << i << ": " << with[i] << "/" << without[i]
               << (i + 1 < 3 ? ", " : ")");
    }
    out.pass = m_with <= m_without;
    out.detail = detail.str();
    return out;
}

Outcome criterion9_tiling() {
    Outcome out;
    const TileLayout t = plan_tiles(4000, 4000, 256, 4);
    if (!(t.grid_rows == 16 && t.grid_cols == 16 && t.out_height == 1000 &&
          t.out_width == 1000 && t.pad_bottom == 96 && t.pad_right == 96)) {
        return {false, false, "4000x4000 plan wrong"};
    }

    Network net(make_preset("micro"));
    net.init_params(91);
    const ShadowParams sp;
    Rng rng(92);
    RgbImage img(128, 192);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));

    const RasterGrid full = predict_full(net, img, sp, 0.25);
    for (int tr = 0; tr < 2; ++tr) {
        for (int tc = 0; tc < 3; ++tc) {
            const RgbImage tile = crop(img, {tr * 64, tc * 64, 64, 64});
            const Tensor y = net.forward_eval(assemble_input(tile, sp));
            for (int r = 0; r < 16; ++r) {
                for (int c = 0; c < 16; ++c) {
                    if (full.at(tr * 16 + r, tc * 16 + c) != std::max(0.0f, y.at(0, r, c, 0))) {
                        return {false, false, "stitched output differs from a lone tile"};
                    }
                }
            }
        }
    }
    // degenerate tiling: image of exactly one patch
    const RgbImage one = crop(img, {0, 0, 64, 64});
    const RasterGrid single = predict_full(net, one, sp, 0.25);
    const Tensor y = net.forward_eval(assemble_input(one, sp));
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            if (single.at(r, c) != std::max(0.0f, y.at(0, r, c, 0))) {
                return {false, false, "single-patch prediction differs"};
            }
        }
    }
    out.pass = true;
    out.detail = "4000->1000 plan (16x16 tiles, pads 96); stitching bit-exact per tile";
    return out;
}

Outcome criterion10_data_rules() {
    Outcome out;
    const DatasetMode man = DatasetMode::manchester();
    const DatasetMode synth = DatasetMode::synthetic();

    RasterGrid dsm(4, 4, 1.0f, 0.0f);
    dsm.at(0, 0) = 1.2f;
    dsm.at(0, 1) = 1.5f;
    const RasterGrid dtm(4, 4, 1.0f, 0.0f);
    const RasterGrid h = compute_height_ground_truth(dsm, dtm, man);
    if (h.at(0, 0) != 0.0f) return {false, false, "1.2 m not zeroed"};
    if (h.at(0, 1) != 1.5f) return {false, false, "1.5 m boundary wrongly zeroed"};

    RasterGrid extreme(16, 16, 1.0f, 5.0f);
    extreme.at(3, 3) = 150.0f;
    if (validate_patch(extreme, synth).valid) return {false, false, ">100 m not excluded"};
    if (validate_patch(extreme, synth).reason != "extreme") return {false, false, "wrong reason"};

    RasterGrid nodata(16, 16, 1.0f, 2.0f);
    nodata.set_invalid(15, 15);
    const auto v = validate_patch(nodata, synth);
    if (v.valid || v.reason != "nodata") return {false, false, "single bad pixel not rejected"};

    auto fabricate = [&](int n) {
        PatchCatalog cat;
        cat.mode = synth;
        for (int i = 0; i < n; ++i) {
            PatchRecord r;
            r.source_id = "x";
            r.off_row = i;
            cat.records.push_back(r);
        }
        return cat;
    };
    {
        PatchCatalog cat = fabricate(100);
        split_catalog(cat, 77);
        int tr = 0, va = 0, te = 0;
        for (const auto& r : cat.records) {
            tr += r.split == Split::train;
            va += r.split == Split::val;
            te += r.split == Split::test;
        }
        if (!(tr == 70 && va == 15 && te == 15)) return {false, false, "100 != 70/15/15"};

        PatchCatalog again = fabricate(100);
        split_catalog(again, 77);
        for (std::size_t i = 0; i < cat.records.size(); ++i) {
            if (cat.records[i].split != again.records[i].split) {
                return {false, false, "split not deterministic per seed"};
            }
        }
    }
    {
        PatchCatalog cat = fabricate(10);
        split_catalog(cat, 3);
        int tr = 0, va = 0, te = 0;
        for (const auto& r : cat.records) {
            tr += r.split == Split::train;
            va += r.split == Split::val;
            te += r.split == Split::test;
        }
        if (!(tr == 6 && va == 2 && te == 2)) return {false, false, "10 != 6/2/2"};
    }
    out.pass = true;
    out.detail = "1.5 m zeroing, 100 m exclusion, single-pixel rejection, 70/15/15 + 6/2/2 splits";
    return out;
}

Outcome criterion11_probe(Lab& lab) {
    Outcome out;
    if (probe_positions(256, 32, 32).size() != 64) {
        return {false, false, "256/32/32 grid is not 64 positions"};
    }
    {
        Network net(make_preset("micro"));
        net.init_params(111);
        ProbeConfig cfg;
        cfg.mask_size = 0;
        cfg.stride = 32;
        const SweepResult res = sensitivity_sweep(net, random_input(1, 64, 4, 112), cfg);
        for (const Tensor& d : res.delta_maps) {
            for (float v : d.data) {
                if (v != 0.0f) return {false, false, "zero-size mask produced nonzero deltas"};
            }
        }
    }

    // Directional statistic on the criterion-7 model: imposed shadows next
    // to buildings must move predictions more than shadows on open ground.
    const Network& net = lab.run(Lab::kSeeds[0], true).best.net;
    ProbeConfig cfg;
    cfg.mask_size = 8;  // 32 px at 256-input scale maps to 8 px at 64
    cfg.stride = 8;
    cfg.target = ProbeConfig::Target::shadow_one;

    std::vector<double> near, far;
    int patches_used = 0;
    for (std::uint64_t scene_seed = 500; scene_seed < 530 && patches_used < 6; ++scene_seed) {
        SceneParams p;
        p.world = 64;  // one patch per scene
        p.n_buildings = 1;
        p.footprint_min = 16;
        p.footprint_max = 24;
        p.seed = scene_seed;
        const Scene scene = generate_scene(p);
        const Building& b = scene.buildings[0];
        // want room around the building for unambiguous far positions
        if (b.row < 4 || b.col < 4 || b.row + b.rows > 60 || b.col + b.cols > 60) continue;
        ++patches_used;

        const Tensor input = assemble_input(scene.rgb, ShadowParams{});
        const SweepResult res = sensitivity_sweep(net, input, cfg);
        for (std::size_t i = 0; i < res.positions.size(); ++i) {
            const MaskRect& m = res.positions[i];
            const int pad = 6;
            const bool touches_building =
                m.top < b.row + b.rows + pad && b.row < m.top + m.size + pad &&
                m.left < b.col + b.cols + pad && b.col < m.left + m.size + pad;
            bool touches_shadow = false;
            for (int r = m.top; r < m.top + m.size && !touches_shadow; ++r) {
                for (int c = m.left; c < m.left + m.size; ++c) {
                    if (scene.true_shadow.at(r, c)) {
                        touches_shadow = true;
                        break;
                    }
                }
            }
            double mean_abs = 0.0;
            for (float v : res.delta_maps[i].data) mean_abs += std::abs(v);
            mean_abs /= static_cast<double>(res.delta_maps[i].size());
            if (touches_building) {
                near.push_back(mean_abs);
            } else if (!touches_shadow) {
                far.push_back(mean_abs);
            }
        }
    }
    if (near.empty() || far.empty()) return {false, false, "no usable probe positions"};
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double m_near = median(near), m_far = median(far);
    std::ostringstream detail;
    detail << std::fixed << "median |delta| adjacent " << m_near << " m vs open ground " << m_far
           << " m over " << patches_used << " patches (" << near.size() << "/" << far.size()
           << " positions)";
    out.pass = m_near > m_far;
    out.detail = detail.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    std::string cache;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else if (std::strcmp(argv[i], "--cache") == 0 && i + 1 < argc) {
            cache = argv[++i];
        }
    }

    Lab lab;
    lab.cache_dir = cache;

    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries = {
        {1, "shape conformance (256->64, 520->52)", [] { return criterion1_shapes(); }},
        {2, "parameter counts vs published claims", [] { return criterion2_parameters(); }},
        {3, "pixel shuffle round trip, 1000 shapes", [] { return criterion3_pixel_shuffle(); }},
        {4, "shadow extraction vs independent reference", [] { return criterion4_shadow_oracle(); }},
        {5, "gradient check vs finite differences", [] { return criterion5_gradients(); }},
        {6, "fixed-batch overfit sanity (1000 steps)", [] { return criterion6_overfit(); }},
        {7, "synthetic end-to-end vs constant oracle", [&] { return criterion7_end_to_end(lab); }},
        {8, "shadow-channel ablation, 3 seeds (soft)", [&] { return criterion8_ablation(lab); }},
        {9, "tile planning and bit-exact stitching", [] { return criterion9_tiling(); }},
        {10, "ground-truth and split rules", [] { return criterion10_data_rules(); }},
        {11, "sliding-mask probe", [&] { return criterion11_probe(lab); }},
    };

    int hard_failures = 0;
    for (const Entry& e : entries) {
        if (!only.empty() && !only.count(e.id)) continue;
        const auto t0 = clock_type::now();
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        const char* tag = o.pass ? "[PASS]" : (o.soft ? "[FLAG]" : "[FAIL]");
        if (!o.pass && !o.soft) ++hard_failures;
        std::printf("%s criterion %2d: %s — %s (%.1f s)\n", tag, e.id, e.name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    if (hard_failures > 0) {
        std::printf("%d hard criterion failure(s)\n", hard_failures);
    }
    return hard_failures;
}
