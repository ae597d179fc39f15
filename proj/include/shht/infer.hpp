#pragma once

#include <string>
#include <vector>

#include "shht/datapipe.hpp"
#include "shht/grid.hpp"
#include "shht/net.hpp"

namespace shht {

// Whole-image tiling: reflect-pad bottom/right to the next patch multiple,
// predict per tile, stitch, crop to floor(dims/ratio).
struct TileLayout {
    int patch = 0;
    int ratio = 1;
    int in_height = 0, in_width = 0;
    int grid_rows = 0, grid_cols = 0;
    int pad_bottom = 0, pad_right = 0;
    int out_height = 0, out_width = 0;
};

TileLayout plan_tiles(int height, int width, int patch, int ratio);

// Tiled inference over an arbitrary RGB raster. Predictions are clamped to
// >= 0; output gsd = rgb_gsd * ratio. The model's preset fixes patch size and
// ratio; a 3-channel model skips the shadow channel.
RasterGrid predict_full(const Network& net, const RgbImage& rgb, const ShadowParams& sp,
                        double rgb_gsd = 0.25);

struct ImageError {
    std::string id;
    double mae = 0.0;
    double rmse = 0.0;
    std::int64_t n_pixels = 0;
};

struct EvalReport {
    double mae = 0.0;   // micro-averaged over all valid pixels
    double rmse = 0.0;
    std::int64_t n_pixels = 0;
    std::vector<ImageError> per_image;  // macro view, grouped by source raster
    std::string mode;
    bool used_shadow_channel = true;
};

// Patch-wise evaluation of one split; predictions clamped >= 0, metrics over
// valid target pixels only.
EvalReport evaluate(const Network& net, const Dataset& ds, Split split,
                    const ShadowParams& sp);

std::string eval_report_json(const EvalReport& rep);

}  // namespace shht
