#pragma once

#include <cstdint>
#include <vector>

#include "shht/grid.hpp"

namespace shht {

// 8-bit single-channel image (intermediate product of shadow extraction).
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
    std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

struct ShadowParams {
    bool contrast_stretch = true;   // global per-channel percentile stretch
    double stretch_low = 2.0;       // percentiles, 0 <= low < high <= 100
    double stretch_high = 98.0;
    double blur_sigma = 1.0;        // pixels; 0 disables the blur
    int threshold = 15;             // shadow iff processed intensity < threshold

    void validate() const;
};

// BT.601 luma, computed in exact integer arithmetic:
//   g = (299*R + 587*G + 114*B + 500) / 1000
// which equals floor(0.299*R + 0.587*G + 0.114*B + 0.5).
GrayImage to_grayscale(const RgbImage& rgb);

// Global per-channel linear percentile stretch to [0,255] with clipping.
// Percentiles use the nearest-rank rule on the channel histogram; a flat
// channel (hi <= lo) is left unchanged.
RgbImage stretch_contrast(const RgbImage& rgb, double low_pct, double high_pct);

// Binary shadow extraction: optional contrast stretch, grayscale conversion,
// optional Gaussian blur (odd kernel, half-width ceil(3*sigma), reflected
// borders), then a strict threshold on the processed intensity.
//
// The blur uses fixed-point weights (round(2^16 * exp(-d^2/2sigma^2))) with
// 64-bit integer accumulation, so the whole pipeline is exact integer math:
// results are bit-reproducible across platforms and exactly equivariant
// under 90-degree rotations.
ShadowMap compute_shadow_map(const RgbImage& rgb, const ShadowParams& params = {});

}  // namespace shht
