// Command-line front end: shadowmap / prepare / synth / train / evaluate /
// predict / probe. One JSON config file plus flag overrides (flags win);
// every run is reproducible from (config, seed). Exit codes: 0 success,
// 1 usage error, 2 data error, 3 diverged training.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "shht/datapipe.hpp"
#include "shht/errors.hpp"
#include "shht/infer.hpp"
#include "shht/net.hpp"
#include "shht/png_io.hpp"
#include "shht/probe.hpp"
#include "shht/shadow.hpp"
#include "shht/synthcity.hpp"
#include "shht/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct AppConfig {
    std::string mode = "synthetic";
    std::string preset = "micro";
    std::uint64_t seed = 0;
    shht::ShadowParams shadow;
    shht::TrainConfig train;
    shht::AugmentConfig augment;
    shht::ProbeConfig probe;
    shht::SceneParams synth;
    int synth_scenes = 80;
    struct Paths {
        std::string data_root;
        std::string catalog;
        std::string checkpoints;
        std::string outputs;
    } paths;
};

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) ok = true;
        }
        if (!ok) throw shht::InvalidArgument("config: unknown key '" + key + "' in " + where);
    }
}

AppConfig load_config(const std::string& path) {
    AppConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw shht::IoError("config: cannot open " + path);
    json j = json::parse(in, nullptr, true, true);

    reject_unknown(j, {"schema_version", "mode", "preset", "seed", "shadow", "train", "augment",
                       "probe", "synth", "paths"}, "root");
    cfg.mode = j.value("mode", cfg.mode);
    cfg.preset = j.value("preset", cfg.preset);
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("shadow")) {
        const json& s = j["shadow"];
        reject_unknown(s, {"contrast_stretch", "stretch_low", "stretch_high", "blur_sigma",
                           "threshold"}, "shadow");
        cfg.shadow.contrast_stretch = s.value("contrast_stretch", cfg.shadow.contrast_stretch);
        cfg.shadow.stretch_low = s.value("stretch_low", cfg.shadow.stretch_low);
        cfg.shadow.stretch_high = s.value("stretch_high", cfg.shadow.stretch_high);
        cfg.shadow.blur_sigma = s.value("blur_sigma", cfg.shadow.blur_sigma);
        cfg.shadow.threshold = s.value("threshold", cfg.shadow.threshold);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        reject_unknown(t, {"lr0", "plateau_factor", "plateau_patience", "min_lr", "batch_size",
                           "max_epochs", "use_shadow_channel", "checkpoint_every"}, "train");
        cfg.train.lr0 = t.value("lr0", cfg.train.lr0);
        cfg.train.plateau_factor = t.value("plateau_factor", cfg.train.plateau_factor);
        cfg.train.plateau_patience = t.value("plateau_patience", cfg.train.plateau_patience);
        cfg.train.min_lr = t.value("min_lr", cfg.train.min_lr);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
        cfg.train.use_shadow_channel = t.value("use_shadow_channel", cfg.train.use_shadow_channel);
        cfg.train.checkpoint_every = t.value("checkpoint_every", cfg.train.checkpoint_every);
    }
    if (j.contains("augment")) {
        const json& a = j["augment"];
        reject_unknown(a, {"rotate", "photometric", "shift_mag", "contrast_lo", "contrast_hi"},
                       "augment");
        cfg.augment.rotate = a.value("rotate", cfg.augment.rotate);
        cfg.augment.photometric = a.value("photometric", cfg.augment.photometric);
        cfg.augment.shift_mag = a.value("shift_mag", cfg.augment.shift_mag);
        cfg.augment.contrast_lo = a.value("contrast_lo", cfg.augment.contrast_lo);
        cfg.augment.contrast_hi = a.value("contrast_hi", cfg.augment.contrast_hi);
    }
    if (j.contains("probe")) {
        const json& p = j["probe"];
        reject_unknown(p, {"mask_size", "stride", "target", "aggregate", "brighten_level"},
                       "probe");
        cfg.probe.mask_size = p.value("mask_size", cfg.probe.mask_size);
        cfg.probe.stride = p.value("stride", cfg.probe.stride);
        if (p.contains("target")) {
            cfg.probe.target = shht::probe_target_from_string(p["target"].get<std::string>());
        }
        if (p.contains("aggregate")) {
            const std::string a = p["aggregate"].get<std::string>();
            if (a == "max_abs") cfg.probe.aggregate = shht::ProbeConfig::Aggregate::max_abs;
            else if (a == "mean") cfg.probe.aggregate = shht::ProbeConfig::Aggregate::mean;
            else throw shht::InvalidArgument("config: unknown probe aggregate: " + a);
        }
        cfg.probe.brighten_level = p.value("brighten_level", cfg.probe.brighten_level);
    }
    if (j.contains("synth")) {
        const json& s = j["synth"];
        reject_unknown(s, {"world", "rgb_gsd", "ratio", "n_buildings", "height_min", "height_max",
                           "footprint_min", "footprint_max", "sun_azimuth_deg",
                           "sun_elevation_deg", "noise_sigma", "n_scenes"}, "synth");
        cfg.synth.world = s.value("world", cfg.synth.world);
        cfg.synth.rgb_gsd = s.value("rgb_gsd", cfg.synth.rgb_gsd);
        cfg.synth.ratio = s.value("ratio", cfg.synth.ratio);
        cfg.synth.n_buildings = s.value("n_buildings", cfg.synth.n_buildings);
        cfg.synth.height_min = s.value("height_min", cfg.synth.height_min);
        cfg.synth.height_max = s.value("height_max", cfg.synth.height_max);
        cfg.synth.footprint_min = s.value("footprint_min", cfg.synth.footprint_min);
        cfg.synth.footprint_max = s.value("footprint_max", cfg.synth.footprint_max);
        cfg.synth.sun_azimuth_deg = s.value("sun_azimuth_deg", cfg.synth.sun_azimuth_deg);
        cfg.synth.sun_elevation_deg = s.value("sun_elevation_deg", cfg.synth.sun_elevation_deg);
        cfg.synth.noise_sigma = s.value("noise_sigma", cfg.synth.noise_sigma);
        cfg.synth_scenes = s.value("n_scenes", cfg.synth_scenes);
    }
    if (j.contains("paths")) {
        const json& p = j["paths"];
        reject_unknown(p, {"data_root", "catalog", "checkpoints", "outputs"}, "paths");
        cfg.paths.data_root = p.value("data_root", cfg.paths.data_root);
        cfg.paths.catalog = p.value("catalog", cfg.paths.catalog);
        cfg.paths.checkpoints = p.value("checkpoints", cfg.paths.checkpoints);
        cfg.paths.outputs = p.value("outputs", cfg.paths.outputs);
    }
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw shht::IoError("cannot write " + path);
    out << text << "\n";
}

int default_batch(const std::string& preset) {
    if (preset == "manchester") return 8;
    if (preset == "dfc") return 2;
    return 32;  // micro / reduced
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadow-aware monocular heightmap estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--config", config_path, "JSON config file")->expected(1);
    app.add_option("--seed", seed_flag, "override the run seed");

    // ---- shadowmap ----
    auto* sm = app.add_subcommand("shadowmap", "compute a binary shadow map PNG");
    std::string sm_in, sm_out;
    std::optional<double> sm_sigma, sm_low, sm_high;
    std::optional<int> sm_threshold;
    bool sm_no_stretch = false;
    sm->add_option("--in", sm_in, "input RGB image (PNG)")->required();
    sm->add_option("--out", sm_out, "output 1-bit PNG")->required();
    sm->add_flag("--no-stretch", sm_no_stretch, "disable the contrast stretch");
    sm->add_option("--sigma", sm_sigma, "gaussian blur sigma in pixels");
    sm->add_option("--low", sm_low, "stretch low percentile");
    sm->add_option("--high", sm_high, "stretch high percentile");
    sm->add_option("--threshold", sm_threshold, "shadow intensity threshold");

    // ---- prepare ----
    auto* pre = app.add_subcommand("prepare", "cut rasters into a patch catalog");
    std::string pre_rgb, pre_dsm, pre_dtm, pre_mode = "manchester", pre_out, pre_id = "img0";
    std::optional<int> pre_stride;
    pre->add_option("--rgb", pre_rgb, "RGB raster (PNG)")->required();
    pre->add_option("--dsm", pre_dsm, "DSM raster (16-bit PNG + sidecar)")->required();
    pre->add_option("--dtm", pre_dtm, "DTM raster (16-bit PNG + sidecar)")->required();
    pre->add_option("--mode", pre_mode, "dataset mode (manchester|dfc|synthetic)");
    pre->add_option("--out", pre_out, "catalog output directory")->required();
    pre->add_option("--stride", pre_stride, "patch stride in RGB pixels");
    pre->add_option("--source-id", pre_id, "identifier recorded for this raster");

    // ---- synth ----
    auto* sy = app.add_subcommand("synth", "generate a synthetic patch catalog");
    std::string sy_out;
    std::optional<int> sy_scenes, sy_world, sy_buildings;
    std::optional<double> sy_noise;
    sy->add_option("--out", sy_out, "catalog output directory")->required();
    sy->add_option("--scenes", sy_scenes, "number of scenes");
    sy->add_option("--world", sy_world, "scene side in RGB pixels");
    sy->add_option("--buildings", sy_buildings, "buildings per scene");
    sy->add_option("--noise-sigma", sy_noise, "pixel noise sigma");

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train a model on a patch catalog");
    std::string tr_catalog, tr_out, tr_preset;
    std::optional<int> tr_epochs, tr_batch, tr_ckpt_every;
    std::optional<double> tr_lr;
    bool tr_no_shadow = false;
    tr->add_option("--catalog", tr_catalog, "catalog directory")->required();
    tr->add_option("--out", tr_out, "output directory (checkpoints + history)")->required();
    tr->add_option("--preset", tr_preset, "model preset (manchester|dfc|reduced|micro)");
    tr->add_option("--epochs", tr_epochs, "maximum epochs");
    tr->add_option("--batch", tr_batch, "batch size");
    tr->add_option("--lr", tr_lr, "initial learning rate");
    tr->add_option("--checkpoint-every", tr_ckpt_every, "periodic checkpoint interval (epochs)");
    tr->add_flag("--no-shadow-channel", tr_no_shadow, "train the 3-channel ablation");

    // ---- evaluate ----
    auto* ev = app.add_subcommand("evaluate", "evaluate a checkpoint on a split");
    std::string ev_catalog, ev_ckpt, ev_split = "test", ev_report;
    ev->add_option("--catalog", ev_catalog, "catalog directory")->required();
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
    ev->add_option("--split", ev_split, "split to evaluate (train|val|test)");
    ev->add_option("--report", ev_report, "output report JSON")->required();

    // ---- predict ----
    auto* pr = app.add_subcommand("predict", "tiled heightmap inference on an RGB image");
    std::string pr_ckpt, pr_in, pr_out, pr_heat;
    std::optional<double> pr_gsd;
    pr->add_option("--checkpoint", pr_ckpt, "checkpoint file")->required();
    pr->add_option("--in", pr_in, "input RGB image (PNG)")->required();
    pr->add_option("--out", pr_out, "output heightmap (16-bit PNG + sidecar)")->required();
    pr->add_option("--heatmap", pr_heat, "optional color-relief PNG");
    pr->add_option("--gsd", pr_gsd, "RGB ground-sample distance (m/px)");

    // ---- probe ----
    auto* pb = app.add_subcommand("probe", "sliding-mask sensitivity probe on one patch");
    std::string pb_ckpt, pb_in, pb_prefix, pb_target;
    std::optional<int> pb_mask, pb_stride;
    pb->add_option("--checkpoint", pb_ckpt, "checkpoint file")->required();
    pb->add_option("--in", pb_in, "input patch image (PNG, model input size)")->required();
    pb->add_option("--out-prefix", pb_prefix, "output prefix for maps + summary")->required();
    pb->add_option("--mask-size", pb_mask, "mask side length in pixels");
    pb->add_option("--stride", pb_stride, "mask stride in pixels");
    pb->add_option("--target", pb_target, "rgb_zero|shadow_one|shadow_zero|rgb_brighten");

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "shht: error[usage]: " << e.what() << "\n";
        return 1;
    }

    try {
        AppConfig cfg = load_config(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        cfg.train.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
        cfg.train.shadow = cfg.shadow;
        cfg.train.augment.shadow = cfg.shadow;
        cfg.shadow.validate();

        if (*sm) {
            shht::ShadowParams p = cfg.shadow;
            if (sm_no_stretch) p.contrast_stretch = false;
            if (sm_sigma) p.blur_sigma = *sm_sigma;
            if (sm_low) p.stretch_low = *sm_low;
            if (sm_high) p.stretch_high = *sm_high;
            if (sm_threshold) p.threshold = *sm_threshold;
            p.validate();
            const shht::RgbImage img = shht::read_png_rgb(sm_in);
            shht::write_png_shadow(sm_out, shht::compute_shadow_map(img, p));
        } else if (*pre) {
            const shht::DatasetMode mode = shht::DatasetMode::by_name(pre_mode);
            const shht::RgbImage rgb = shht::read_png_rgb(pre_rgb);
            const shht::RasterGrid dsm = shht::read_raster_png16(pre_dsm);
            const shht::RasterGrid dtm = shht::read_raster_png16(pre_dtm);
            shht::Dataset ds = shht::build_dataset(rgb, dsm, dtm, mode,
                                                   pre_stride ? *pre_stride : mode.patch_rgb,
                                                   pre_id);
            shht::split_dataset(ds, cfg.seed);
            shht::save_dataset(ds, pre_out);
            std::cout << "catalog: " << ds.catalog.records.size() << " records -> " << pre_out
                      << "\n";
        } else if (*sy) {
            shht::SceneParams p = cfg.synth;
            if (sy_world) p.world = *sy_world;
            if (sy_buildings) p.n_buildings = *sy_buildings;
            if (sy_noise) p.noise_sigma = *sy_noise;
            const int scenes = sy_scenes ? *sy_scenes : cfg.synth_scenes;
            shht::DatasetMode mode = shht::DatasetMode::synthetic();
            mode.rgb_gsd = p.rgb_gsd;
            mode.ratio = p.ratio;
            mode.patch_out = mode.patch_rgb / mode.ratio;
            const shht::Dataset ds = shht::generate_dataset(p, scenes, mode);
            shht::save_dataset(ds, sy_out);
            std::cout << "catalog: " << ds.catalog.records.size() << " records -> " << sy_out
                      << "\n";
        } else if (*tr) {
            shht::TrainConfig tc = cfg.train;
            const std::string preset = tr_preset.empty() ? cfg.preset : tr_preset;
            if (!shht::is_known_preset(preset)) {
                std::cerr << "shht: error[usage]: unknown preset '" << preset << "'\n";
                return 1;
            }
            if (tr_no_shadow) tc.use_shadow_channel = false;
            if (tr_epochs) tc.max_epochs = *tr_epochs;
            if (tr_lr) tc.lr0 = *tr_lr;
            tc.batch_size = tr_batch ? *tr_batch : default_batch(preset);
            if (tr_ckpt_every) tc.checkpoint_every = *tr_ckpt_every;
            fs::create_directories(tr_out);
            if (tc.checkpoint_every > 0) tc.checkpoint_dir = tr_out;

            const shht::Dataset ds = shht::load_dataset(tr_catalog);
            shht::Network net(shht::make_preset(preset, tc.use_shadow_channel));
            net.init_params(cfg.seed);
            const shht::FitResult res = shht::fit(net, ds, tc);
            shht::save_checkpoint(res.best, (fs::path(tr_out) / "best.shht").string());
            write_text((fs::path(tr_out) / "history.json").string(),
                       shht::history_json(res.history));
            if (!res.history.empty()) {
                std::cout << "best val MAE " << res.best.best_val << " m after epoch "
                          << res.best.epoch << "\n";
            }
        } else if (*ev) {
            const shht::Checkpoint ckpt = shht::load_checkpoint(ev_ckpt);
            const shht::Dataset ds = shht::load_dataset(ev_catalog);
            const shht::EvalReport rep =
                shht::evaluate(ckpt.net, ds, shht::split_from_string(ev_split), cfg.shadow);
            write_text(ev_report, shht::eval_report_json(rep));
            std::cout << "MAE " << rep.mae << " m, RMSE " << rep.rmse << " m over "
                      << rep.n_pixels << " pixels\n";
        } else if (*pr) {
            const shht::Checkpoint ckpt = shht::load_checkpoint(pr_ckpt);
            const shht::RgbImage img = shht::read_png_rgb(pr_in);
            const shht::RasterGrid out =
                shht::predict_full(ckpt.net, img, cfg.shadow, pr_gsd ? *pr_gsd : 0.25);
            shht::write_raster_png16(pr_out, out);
            if (!pr_heat.empty()) shht::write_heatmap_png(pr_heat, out);
            std::cout << "heightmap " << out.height << "x" << out.width << " -> " << pr_out
                      << "\n";
        } else if (*pb) {
            shht::ProbeConfig pc = cfg.probe;
            if (pb_mask) pc.mask_size = *pb_mask;
            if (pb_stride) pc.stride = *pb_stride;
            if (!pb_target.empty()) pc.target = shht::probe_target_from_string(pb_target);
            const shht::Checkpoint ckpt = shht::load_checkpoint(pb_ckpt);
            const shht::RgbImage img = shht::read_png_rgb(pb_in);
            const bool use_shadow = ckpt.net.spec().input_channels == 4;
            const shht::Tensor input = shht::assemble_input(img, cfg.shadow, use_shadow);
            const shht::SweepResult res = shht::sensitivity_sweep(ckpt.net, input, pc);

            shht::RasterGrid agg(res.aggregate.h, res.aggregate.w, 1.0f);
            for (std::size_t i = 0; i < agg.size(); ++i) agg.values[i] = res.aggregate.data[i];
            shht::write_heatmap_png(pb_prefix + "_aggregate.png", agg);
            write_text(pb_prefix + "_summary.json", shht::sweep_summary_json(res));
            std::cout << res.positions.size() << " mask positions -> " << pb_prefix
                      << "_summary.json\n";
        }
        return 0;
    } catch (const shht::TrainingDiverged& e) {
        std::cerr << "shht: error[train]: " << e.what() << "\n";
        return 3;
    } catch (const shht::SpecError& e) {
        std::cerr << "shht: error[usage]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "shht: error[data]: " << e.what() << "\n";
        return 2;
    }
}
