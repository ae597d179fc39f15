#include "shht/shadow.hpp"

#include <cmath>
#include <cstdint>

#include "shht/errors.hpp"

namespace shht {

void ShadowParams::validate() const {
    if (!(stretch_low >= 0.0 && stretch_low < stretch_high && stretch_high <= 100.0)) {
        throw InvalidArgument("ShadowParams: need 0 <= low < high <= 100");
    }
    if (threshold < 0 || threshold > 255) {
        throw InvalidArgument("ShadowParams: threshold must be in [0,255]");
    }
    if (blur_sigma < 0.0) throw InvalidArgument("ShadowParams: blur_sigma must be >= 0");
}

GrayImage to_grayscale(const RgbImage& rgb) {
    GrayImage out(rgb.height, rgb.width);
    const std::size_t n = static_cast<std::size_t>(rgb.height) * rgb.width;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const std::uint32_t r = rgb.data[3 * i + 0];
        const std::uint32_t g = rgb.data[3 * i + 1];
        const std::uint32_t b = rgb.data[3 * i + 2];
        out.data[i] = static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
    }
    return out;
}

namespace {

// Nearest-rank percentile on a 256-bin histogram.
int percentile_value(const std::uint32_t* hist, std::size_t n, double pct) {
    std::uint64_t rank = static_cast<std::uint64_t>(std::ceil(pct * static_cast<double>(n) / 100.0));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    std::uint64_t cum = 0;
    for (int v = 0; v < 256; ++v) {
        cum += hist[v];
        if (cum >= rank) return v;
    }
    return 255;
}

// Index reflection with the edge repeated (…, x1, x0 | x0, x1, …); handles
// offsets beyond one image width via the 2n period.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

}  // namespace

RgbImage stretch_contrast(const RgbImage& rgb, double low_pct, double high_pct) {
    RgbImage out = rgb;
    const std::size_t n = static_cast<std::size_t>(rgb.height) * rgb.width;
    if (n == 0) return out;
    for (int ch = 0; ch < 3; ++ch) {
        std::uint32_t hist[256] = {0};
        for (std::size_t i = 0; i < n; ++i) ++hist[rgb.data[3 * i + ch]];
        const int lo = percentile_value(hist, n, low_pct);
        const int hi = percentile_value(hist, n, high_pct);
        if (hi <= lo) continue;
        // v' = clamp(round(255*(v-lo)/(hi-lo)), 0, 255), exact in integers
        const std::int64_t den = hi - lo;
        std::uint8_t lut[256];
        for (int v = 0; v < 256; ++v) {
            if (v <= lo) {
                lut[v] = 0;
            } else if (v >= hi) {
                lut[v] = 255;
            } else {
                const std::int64_t num = 255ll * (v - lo);
                lut[v] = static_cast<std::uint8_t>((2 * num + den) / (2 * den));
            }
        }
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            out.data[3 * i + ch] = lut[out.data[3 * i + ch]];
        }
    }
    return out;
}

ShadowMap compute_shadow_map(const RgbImage& rgb, const ShadowParams& params) {
    params.validate();
    if (rgb.height <= 0 || rgb.width <= 0) throw EmptyInput("compute_shadow_map: empty image");

    const GrayImage gray = params.contrast_stretch
        ? to_grayscale(stretch_contrast(rgb, params.stretch_low, params.stretch_high))
        : to_grayscale(rgb);

    const int h = gray.height;
    const int w = gray.width;
    ShadowMap out(h, w);

    if (params.blur_sigma <= 0.0) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(gray.data.size()); ++i) {
            out.data[i] = gray.data[i] < params.threshold ? 1 : 0;
        }
        return out;
    }

    // Fixed-point Gaussian weights; integer accumulation keeps the separable
    // passes exactly order-independent.
    const double sigma = params.blur_sigma;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<std::int64_t> wgt(radius + 1);
    for (int d = 0; d <= radius; ++d) {
        wgt[d] = std::llround(65536.0 * std::exp(-0.5 * d * d / (sigma * sigma)));
    }
    std::int64_t wsum = wgt[0];
    for (int d = 1; d <= radius; ++d) wsum += 2 * wgt[d];
    const std::int64_t cutoff = static_cast<std::int64_t>(params.threshold) * wsum * wsum;

    std::vector<std::int64_t> tmp(gray.data.size());
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::int64_t acc = wgt[0] * gray.at(r, c);
            for (int d = 1; d <= radius; ++d) {
                acc += wgt[d] * (static_cast<std::int64_t>(gray.at(r, reflect_index(c - d, w))) +
                                 gray.at(r, reflect_index(c + d, w)));
            }
            tmp[static_cast<std::size_t>(r) * w + c] = acc;
        }
    }
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::int64_t acc = wgt[0] * tmp[static_cast<std::size_t>(r) * w + c];
            for (int d = 1; d <= radius; ++d) {
                acc += wgt[d] * (tmp[static_cast<std::size_t>(reflect_index(r - d, h)) * w + c] +
                                 tmp[static_cast<std::size_t>(reflect_index(r + d, h)) * w + c]);
            }
            out.at(r, c) = acc < cutoff ? 1 : 0;
        }
    }
    return out;
}

}  // namespace shht
