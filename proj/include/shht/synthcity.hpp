#pragma once

#include <cstdint>
#include <vector>

#include "shht/datapipe.hpp"
#include "shht/grid.hpp"

namespace shht {

// Procedural scenes: axis-aligned flat-roofed buildings on flat ground, each
// casting a dark shadow whose length follows the sun elevation. Intensity
// bands are separable (shadow < ground < roof) so threshold extraction of
// shadows stays meaningful.
struct SceneParams {
    int world = 320;       // RGB raster side, must be a multiple of ratio
    double rgb_gsd = 0.25; // m/px
    int ratio = 4;         // RGB-to-heightmap resolution ratio
    int n_buildings = 6;
    double height_min = 3.0;  // meters
    double height_max = 30.0;
    int footprint_min = 28;  // px at RGB resolution; wide enough that blur
    int footprint_max = 48;  // cannot erode a shadow past the 90% recovery bar
    double sun_azimuth_deg = 135.0;  // bearing the light arrives from, clockwise from image-up
    double sun_elevation_deg = 30.0; // in (0, 90)
    int ground_lo = 80, ground_hi = 160;
    int roof_lo = 170, roof_hi = 230;
    int shadow_lo = 0, shadow_hi = 10;
    double noise_sigma = 2.0;  // per-pixel gaussian intensity noise
    std::uint64_t seed = 0;

    void validate() const;
};

struct Building {
    int row = 0, col = 0, rows = 0, cols = 0;  // footprint at RGB resolution
    double height_m = 0.0;
};

struct Scene {
    RgbImage rgb;
    RasterGrid height_full;  // per-RGB-pixel heights (meters)
    RasterGrid target;       // block-averaged to world/ratio
    ShadowMap true_shadow;   // rendered shadow pixels (ground truth for probes)
    std::vector<Building> buildings;
};

// round(h / tan(elevation) / gsd); elevation must lie in (0, 90) degrees.
int shadow_length_px(double h_meters, double elevation_deg, double gsd);

Scene generate_scene(const SceneParams& params);

// n_scenes scenes cut into patches through the regular datapipe walk and
// split 70/15/15 with the template seed.
Dataset generate_dataset(const SceneParams& tmpl, int n_scenes, const DatasetMode& mode,
                         int stride = 0 /* 0 = patch_rgb */);

}  // namespace shht
