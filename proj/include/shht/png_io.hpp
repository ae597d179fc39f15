#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shht/grid.hpp"

namespace shht {

// Thin libpng wrappers. Readers accept gray/palette/alpha variants and
// normalize to the requested layout; writers emit exactly what is stated.

RgbImage read_png_rgb(const std::string& path);
void write_png_rgb(const std::string& path, const RgbImage& img);

// 1-bit grayscale: shadow (1) -> white, background (0) -> black.
void write_png_shadow(const std::string& path, const ShadowMap& map);
ShadowMap read_png_shadow(const std::string& path);

void write_png_gray16(const std::string& path, const std::vector<std::uint16_t>& data,
                      int height, int width);
std::vector<std::uint16_t> read_png_gray16(const std::string& path, int& height, int& width);

// Elevation raster as 16-bit PNG plus a "<path>.json" sidecar carrying gsd,
// the meters-per-count scale (default 0.01, i.e. meters = value/100) and the
// nodata count (65535).
void write_raster_png16(const std::string& path, const RasterGrid& grid, double scale = 0.01);
RasterGrid read_raster_png16(const std::string& path);

// Color-relief rendering (blue -> cyan -> green -> yellow -> red over the
// value range; invalid pixels black) for visual inspection of heightmaps.
void write_heatmap_png(const std::string& path, const RasterGrid& grid);

}  // namespace shht
