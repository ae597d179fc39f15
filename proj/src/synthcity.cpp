#include "shht/synthcity.hpp"

#include <algorithm>
#include <cmath>

#include "shht/errors.hpp"

namespace shht {

void SceneParams::validate() const {
    if (world < 1 || world % ratio != 0) {
        throw InvalidArgument("SceneParams: world must be a positive multiple of ratio");
    }
    if (!(sun_elevation_deg > 0.0 && sun_elevation_deg < 90.0)) {
        throw InvalidArgument("SceneParams: sun elevation must be in (0, 90)");
    }
    if (n_buildings < 0 || footprint_min < 1 || footprint_max < footprint_min) {
        throw InvalidArgument("SceneParams: bad building geometry");
    }
    if (height_min <= 0 || height_max < height_min) {
        throw InvalidArgument("SceneParams: bad height range");
    }
}

int shadow_length_px(double h_meters, double elevation_deg, double gsd) {
    if (!(elevation_deg > 0.0 && elevation_deg < 90.0)) {
        throw InvalidArgument("shadow_length_px: elevation must be in (0, 90)");
    }
    const double rad = elevation_deg * 3.14159265358979323846 / 180.0;
    return static_cast<int>(std::llround(h_meters / std::tan(rad) / gsd));
}

Scene generate_scene(const SceneParams& params) {
    params.validate();
    Rng rng(params.seed);
    const int W = params.world;

    Scene scene;
    scene.buildings.reserve(params.n_buildings);

    // Non-overlapping placement with bounded retries.
    int attempts = 0;
    while (static_cast<int>(scene.buildings.size()) < params.n_buildings) {
        if (++attempts > 1000 * std::max(1, params.n_buildings)) {
            throw GenerationError("generate_scene: could not pack buildings");
        }
        Building b;
        b.rows = params.footprint_min +
                 static_cast<int>(rng.below(params.footprint_max - params.footprint_min + 1));
        b.cols = params.footprint_min +
                 static_cast<int>(rng.below(params.footprint_max - params.footprint_min + 1));
        if (b.rows >= W || b.cols >= W) continue;
        b.row = static_cast<int>(rng.below(W - b.rows + 1));
        b.col = static_cast<int>(rng.below(W - b.cols + 1));
        b.height_m = rng.uniform(params.height_min, params.height_max);
        bool clash = false;
        for (const Building& o : scene.buildings) {
            if (b.row < o.row + o.rows + 1 && o.row < b.row + b.rows + 1 &&
                b.col < o.col + o.cols + 1 && o.col < b.col + b.cols + 1) {
                clash = true;
                break;
            }
        }
        if (!clash) scene.buildings.push_back(b);
    }

    scene.height_full = RasterGrid(W, W, static_cast<float>(params.rgb_gsd));
    std::vector<std::uint8_t> footprint(static_cast<std::size_t>(W) * W, 0);
    for (const Building& b : scene.buildings) {
        for (int r = b.row; r < b.row + b.rows; ++r)
            for (int c = b.col; c < b.col + b.cols; ++c) {
                scene.height_full.at(r, c) = static_cast<float>(b.height_m);
                footprint[static_cast<std::size_t>(r) * W + c] = 1;
            }
    }

    // Shadows sweep away from the sun; roofs stay lit.
    scene.true_shadow = ShadowMap(W, W, 0);
    const double az = params.sun_azimuth_deg * 3.14159265358979323846 / 180.0;
    const double dir_r = std::cos(az);
    const double dir_c = -std::sin(az);
    for (const Building& b : scene.buildings) {
        const int len = shadow_length_px(b.height_m, params.sun_elevation_deg, params.rgb_gsd);
        for (int t = 1; t <= len; ++t) {
            const int dr = static_cast<int>(std::llround(dir_r * t));
            const int dc = static_cast<int>(std::llround(dir_c * t));
            for (int r = b.row; r < b.row + b.rows; ++r) {
                for (int c = b.col; c < b.col + b.cols; ++c) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= W || cc < 0 || cc >= W) continue;
                    if (footprint[static_cast<std::size_t>(rr) * W + cc]) continue;
                    scene.true_shadow.at(rr, cc) = 1;
                }
            }
        }
    }

    // Render: gray-world bands, one base intensity per region class.
    const int ground = params.ground_lo +
                       static_cast<int>(rng.below(params.ground_hi - params.ground_lo + 1));
    const int shadow_v = params.shadow_lo +
                         static_cast<int>(rng.below(params.shadow_hi - params.shadow_lo + 1));
    std::vector<int> roof_v(scene.buildings.size());
    for (auto& v : roof_v) {
        v = params.roof_lo + static_cast<int>(rng.below(params.roof_hi - params.roof_lo + 1));
    }
    std::vector<std::uint8_t> owner(static_cast<std::size_t>(W) * W, 0);
    for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
        const Building& b = scene.buildings[bi];
        for (int r = b.row; r < b.row + b.rows; ++r)
            for (int c = b.col; c < b.col + b.cols; ++c) {
                owner[static_cast<std::size_t>(r) * W + c] = static_cast<std::uint8_t>(bi + 1);
            }
    }

    scene.rgb = RgbImage(W, W);
    for (int r = 0; r < W; ++r) {
        for (int c = 0; c < W; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * W + c;
            int base = ground;
            if (owner[i]) base = roof_v[owner[i] - 1];
            else if (scene.true_shadow.data[i]) base = shadow_v;
            for (int ch = 0; ch < 3; ++ch) {
                double v = base;
                if (params.noise_sigma > 0.0) v += rng.gaussian() * params.noise_sigma;
                scene.rgb.at(r, c, ch) =
                    static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
            }
        }
    }

    // Heightmap target: exact block average, conserves the field mean.
    const int out = W / params.ratio;
    scene.target = RasterGrid(out, out, static_cast<float>(params.rgb_gsd * params.ratio));
    const int k = params.ratio;
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < out; ++c) {
            double sum = 0.0;
            for (int dr = 0; dr < k; ++dr)
                for (int dc = 0; dc < k; ++dc) sum += scene.height_full.at(r * k + dr, c * k + dc);
            scene.target.at(r, c) = static_cast<float>(sum / (k * k));
        }
    }
    return scene;
}

Dataset generate_dataset(const SceneParams& tmpl, int n_scenes, const DatasetMode& mode,
                         int stride) {
    if (n_scenes < 1) throw InvalidArgument("generate_dataset: n_scenes must be >= 1");
    mode.validate();
    if (tmpl.ratio != mode.ratio) {
        throw InvalidArgument("generate_dataset: scene ratio differs from dataset mode ratio");
    }
    if (stride == 0) stride = mode.patch_rgb;

    Dataset all;
    all.catalog.mode = mode;
    for (int s = 0; s < n_scenes; ++s) {
        SceneParams p = tmpl;
        p.seed = Rng::derive(tmpl.seed, 0x7363656eULL, static_cast<std::uint64_t>(s)).next_u64();
        const Scene scene = generate_scene(p);

        // The rendered target doubles as a DSM over a zero DTM, so patches go
        // through the same walk/validation as real rasters.
        RasterGrid dtm(scene.target.height, scene.target.width, scene.target.gsd);
        Dataset part = build_dataset(scene.rgb, scene.target, dtm, mode, stride,
                                     "scene" + std::to_string(s));
        for (std::size_t i = 0; i < part.samples.size(); ++i) {
            all.catalog.records.push_back(std::move(part.catalog.records[i]));
            all.samples.push_back(std::move(part.samples[i]));
        }
    }
    split_dataset(all, tmpl.seed);
    return all;
}

}  // namespace shht
