#pragma once

#include <cmath>
#include <cstdint>

#include "shht/grid.hpp"
#include "shht/rng.hpp"
#include "shht/tensor.hpp"

namespace shht::testutil {

inline RgbImage random_rgb(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    RgbImage img(h, w);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

inline RasterGrid random_grid(int h, int w, std::uint64_t seed, float lo = 0.0f, float hi = 50.0f) {
    Rng rng(seed);
    RasterGrid g(h, w, 1.0f);
    for (auto& v : g.values) v = static_cast<float>(rng.uniform(lo, hi));
    return g;
}

inline Tensor random_tensor(int n, int h, int w, int c, std::uint64_t seed, double mag = 1.0) {
    Rng rng(seed);
    Tensor t(n, h, w, c);
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-mag, mag));
    return t;
}

inline float max_abs_diff(const Tensor& a, const Tensor& b) {
    float m = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline float max_rel_diff(const Tensor& a, const Tensor& b) {
    float m = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float den = std::max({std::abs(a.data[i]), std::abs(b.data[i]), 1.0f});
        m = std::max(m, std::abs(a.data[i] - b.data[i]) / den);
    }
    return m;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) && a.data == b.data;
}

}  // namespace shht::testutil
