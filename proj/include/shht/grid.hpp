#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shht/errors.hpp"

namespace shht {

// Elevation raster (DSM, DTM, heightmap). Values are meters; pixels with
// valid=0 carry a quiet sentinel and are excluded from every statistic.
struct RasterGrid {
    static constexpr float kNoData = -9999.0f;

    int height = 0;
    int width = 0;
    std::vector<float> values;       // row-major h*w
    std::vector<std::uint8_t> valid; // 1 = usable
    float gsd = 1.0f;                // meters per pixel, > 0
    std::optional<std::array<double, 2>> origin;

    RasterGrid() = default;
    RasterGrid(int h, int w, float gsd_mpp, float fill = 0.0f);

    float& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
    float at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
    bool is_valid(int r, int c) const { return valid[static_cast<std::size_t>(r) * width + c] != 0; }
    void set_invalid(int r, int c) {
        const std::size_t i = static_cast<std::size_t>(r) * width + c;
        valid[i] = 0;
        values[i] = kNoData;
    }
    std::size_t size() const { return values.size(); }
};

// 8-bit RGB image, interleaved row-major h*w*3.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    RgbImage() = default;
    RgbImage(int h, int w, std::uint8_t fill = 0);

    std::uint8_t& at(int r, int c, int ch) {
        return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
    }
    std::uint8_t at(int r, int c, int ch) const {
        return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
    }
};

// Binary shadow mask, values in {0,1}, same dimensions as its source image.
struct ShadowMap {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    ShadowMap() = default;
    ShadowMap(int h, int w, std::uint8_t fill = 0);

    std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
    std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

enum class Split : std::uint8_t { none, train, val, test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

// One aligned training/eval unit: RGB patch, its shadow map, and the
// downscaled height target. rgb side / target side equals the dataset ratio.
struct PatchSample {
    RgbImage rgb;
    ShadowMap shadow;
    RasterGrid target;
    std::string source_id;
    int off_row = 0; // offset of the patch in the source RGB raster
    int off_col = 0;
    Split split = Split::none;
    bool valid = true;
};

struct CropRect {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;
};

// Clockwise rotation by k*90 degrees, k in {0,1,2,3}. Dimensions swap for
// odd k; the validity mask of a RasterGrid moves with its values.
RasterGrid rotate90(const RasterGrid& g, int k);
RgbImage rotate90(const RgbImage& img, int k);
ShadowMap rotate90(const ShadowMap& m, int k);

RasterGrid crop(const RasterGrid& g, const CropRect& r);
RgbImage crop(const RgbImage& img, const CropRect& r);
ShadowMap crop(const ShadowMap& m, const CropRect& r);

}  // namespace shht
