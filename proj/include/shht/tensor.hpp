#pragma once

#include <cstddef>
#include <vector>

#include "shht/errors.hpp"

namespace shht {

// Dense NHWC tensor. Convolution weights reuse the same container with the
// dims read as (kh, kw, cin, cout); biases as (1, 1, 1, cout).
template <typename T>
struct TensorT {
    int n = 0, h = 0, w = 0, c = 0;
    std::vector<T> data;

    TensorT() = default;
    TensorT(int n_, int h_, int w_, int c_)
        : n(n_), h(h_), w(w_), c(c_),
          data(static_cast<std::size_t>(n_) * h_ * w_ * c_, T(0)) {
        if (n_ < 0 || h_ < 0 || w_ < 0 || c_ < 0) {
            throw InvalidArgument("TensorT: negative dimension");
        }
    }

    std::size_t size() const { return data.size(); }

    std::size_t index(int in, int ih, int iw, int ic) const {
        return ((static_cast<std::size_t>(in) * h + ih) * w + iw) * c + ic;
    }

    T& at(int in, int ih, int iw, int ic) { return data[index(in, ih, iw, ic)]; }
    T at(int in, int ih, int iw, int ic) const { return data[index(in, ih, iw, ic)]; }

    bool same_shape(const TensorT& o) const {
        return n == o.n && h == o.h && w == o.w && c == o.c;
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using Tensor = TensorT<float>;

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& x) {
    TensorT<To> out(x.n, x.h, x.w, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = static_cast<To>(x.data[i]);
    return out;
}

}  // namespace shht
