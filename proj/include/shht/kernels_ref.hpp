#pragma once

// Straight-line serial reference kernels, templated on the scalar type.
// These are the ground truth the optimized float kernels are tested against,
// and the double instantiation backs the finite-difference gradient checks.
// No tricks: direct loops, one accumulator per output value.

#include <cmath>
#include <vector>

#include "shht/tensor.hpp"

namespace shht::ref {

template <typename T>
int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// x: (n,h,w,cin); w: (kh,kw,cin,cout); b: (1,1,1,cout); zero padding.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                  int stride, int pad) {
    const int kh = w.n, kw = w.h, cin = w.w, cout = w.c;
    if (x.c != cin) throw InvalidArgument("conv2d: channel mismatch");
    const int oh = conv_out_dim<T>(x.h, kh, stride, pad);
    const int ow = conv_out_dim<T>(x.w, kw, stride, pad);
    if (oh <= 0 || ow <= 0) throw InvalidArgument("conv2d: output would be empty");
    TensorT<T> y(x.n, oh, ow, cout);
    for (int in = 0; in < x.n; ++in)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int oc = 0; oc < cout; ++oc) {
                    T acc = b.data[oc];
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= x.h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= x.w) continue;
                            for (int ic = 0; ic < cin; ++ic) {
                                acc += x.at(in, iy, ix, ic) * w.at(ky, kx, ic, oc);
                            }
                        }
                    }
                    y.at(in, oy, ox, oc) = acc;
                }
    return y;
}

template <typename T>
TensorT<T> conv2d_grad_input(const TensorT<T>& dy, const TensorT<T>& w,
                             int stride, int pad, int in_h, int in_w) {
    const int kh = w.n, kw = w.h, cin = w.w, cout = w.c;
    TensorT<T> dx(dy.n, in_h, in_w, cin);
    for (int in = 0; in < dy.n; ++in)
        for (int oy = 0; oy < dy.h; ++oy)
            for (int ox = 0; ox < dy.w; ++ox)
                for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= in_h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= in_w) continue;
                        for (int ic = 0; ic < cin; ++ic) {
                            T acc = T(0);
                            for (int oc = 0; oc < cout; ++oc) {
                                acc += dy.at(in, oy, ox, oc) * w.at(ky, kx, ic, oc);
                            }
                            dx.at(in, iy, ix, ic) += acc;
                        }
                    }
                }
    return dx;
}

// Accumulates into dw/db (callers zero them per step).
template <typename T>
void conv2d_grad_params(const TensorT<T>& dy, const TensorT<T>& x,
                        int stride, int pad, TensorT<T>& dw, TensorT<T>& db) {
    const int kh = dw.n, kw = dw.h, cin = dw.w, cout = dw.c;
    for (int in = 0; in < dy.n; ++in)
        for (int oy = 0; oy < dy.h; ++oy)
            for (int ox = 0; ox < dy.w; ++ox) {
                for (int oc = 0; oc < cout; ++oc) db.data[oc] += dy.at(in, oy, ox, oc);
                for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= x.h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= x.w) continue;
                        for (int ic = 0; ic < cin; ++ic) {
                            for (int oc = 0; oc < cout; ++oc) {
                                dw.at(ky, kx, ic, oc) +=
                                    x.at(in, iy, ix, ic) * dy.at(in, oy, ox, oc);
                            }
                        }
                    }
                }
            }
}

// Per-channel batch statistics; kept in double regardless of T so the float
// production path and this reference agree bit-for-bit.
struct BnStats {
    std::vector<double> mean;
    std::vector<double> inv_std;  // 1/sqrt(var + eps), biased variance
};

template <typename T>
TensorT<T> batchnorm_train(const TensorT<T>& x, const TensorT<T>& gamma,
                           const TensorT<T>& beta, double eps, BnStats& stats) {
    const int C = x.c;
    const std::size_t per = x.size() / C;
    if (per == 0) throw InvalidArgument("batchnorm: empty input");
    stats.mean.assign(C, 0.0);
    stats.inv_std.assign(C, 0.0);
    for (int ch = 0; ch < C; ++ch) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const double v = static_cast<double>(x.data[i * C + ch]);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / static_cast<double>(per);
        double var = sq / static_cast<double>(per) - mean * mean;
        if (var < 0.0) var = 0.0;
        stats.mean[ch] = mean;
        stats.inv_std[ch] = 1.0 / std::sqrt(var + eps);
    }
    TensorT<T> y(x.n, x.h, x.w, x.c);
    for (std::size_t i = 0; i < per; ++i)
        for (int ch = 0; ch < C; ++ch) {
            const double xn = (static_cast<double>(x.data[i * C + ch]) - stats.mean[ch]) *
                              stats.inv_std[ch];
            y.data[i * C + ch] = static_cast<T>(
                static_cast<double>(gamma.data[ch]) * xn + static_cast<double>(beta.data[ch]));
        }
    return y;
}

template <typename T>
TensorT<T> batchnorm_eval(const TensorT<T>& x, const TensorT<T>& gamma, const TensorT<T>& beta,
                          const TensorT<T>& run_mean, const TensorT<T>& run_var, double eps) {
    const int C = x.c;
    TensorT<T> y(x.n, x.h, x.w, x.c);
    std::vector<double> scale(C), shift(C);
    for (int ch = 0; ch < C; ++ch) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(run_var.data[ch]) + eps);
        scale[ch] = static_cast<double>(gamma.data[ch]) * inv;
        shift[ch] = static_cast<double>(beta.data[ch]) -
                    scale[ch] * static_cast<double>(run_mean.data[ch]);
    }
    const std::size_t per = x.size() / C;
    for (std::size_t i = 0; i < per; ++i)
        for (int ch = 0; ch < C; ++ch) {
            y.data[i * C + ch] =
                static_cast<T>(scale[ch] * static_cast<double>(x.data[i * C + ch]) + shift[ch]);
        }
    return y;
}

template <typename T>
TensorT<T> batchnorm_backward(const TensorT<T>& dy, const TensorT<T>& x,
                              const TensorT<T>& gamma, const BnStats& stats,
                              TensorT<T>& dgamma, TensorT<T>& dbeta) {
    const int C = x.c;
    const std::size_t per = x.size() / C;
    const double n = static_cast<double>(per);
    TensorT<T> dx(x.n, x.h, x.w, x.c);
    for (int ch = 0; ch < C; ++ch) {
        const double mean = stats.mean[ch];
        const double inv = stats.inv_std[ch];
        double sum_dy = 0.0, sum_dy_xn = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const double g = static_cast<double>(dy.data[i * C + ch]);
            const double xn = (static_cast<double>(x.data[i * C + ch]) - mean) * inv;
            sum_dy += g;
            sum_dy_xn += g * xn;
        }
        dgamma.data[ch] += static_cast<T>(sum_dy_xn);
        dbeta.data[ch] += static_cast<T>(sum_dy);
        const double gam = static_cast<double>(gamma.data[ch]);
        for (std::size_t i = 0; i < per; ++i) {
            const double g = static_cast<double>(dy.data[i * C + ch]);
            const double xn = (static_cast<double>(x.data[i * C + ch]) - mean) * inv;
            dx.data[i * C + ch] = static_cast<T>(
                gam * inv * (g - sum_dy / n - xn * sum_dy_xn / n));
        }
    }
    return dx;
}

// Per-channel parametric ReLU.
template <typename T>
TensorT<T> prelu(const TensorT<T>& x, const TensorT<T>& alpha) {
    TensorT<T> y(x.n, x.h, x.w, x.c);
    const int C = x.c;
    const std::size_t per = x.size() / C;
    for (std::size_t i = 0; i < per; ++i)
        for (int ch = 0; ch < C; ++ch) {
            const T v = x.data[i * C + ch];
            y.data[i * C + ch] = v > T(0) ? v : alpha.data[ch] * v;
        }
    return y;
}

template <typename T>
TensorT<T> prelu_backward(const TensorT<T>& dy, const TensorT<T>& x,
                          const TensorT<T>& alpha, TensorT<T>& dalpha) {
    TensorT<T> dx(x.n, x.h, x.w, x.c);
    const int C = x.c;
    const std::size_t per = x.size() / C;
    for (int ch = 0; ch < C; ++ch) {
        double da = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const T v = x.data[i * C + ch];
            const T g = dy.data[i * C + ch];
            if (v > T(0)) {
                dx.data[i * C + ch] = g;
            } else {
                dx.data[i * C + ch] = alpha.data[ch] * g;
                da += static_cast<double>(g) * static_cast<double>(v);
            }
        }
        dalpha.data[ch] += static_cast<T>(da);
    }
    return dx;
}

// Sub-pixel rearrangement: input channel (dy*s+dx)*cout + c of pixel (i,j)
// lands at output pixel (s*i+dy, s*j+dx), channel c.
template <typename T>
TensorT<T> pixel_shuffle(const TensorT<T>& x, int s) {
    if (s < 1) throw InvalidArgument("pixel_shuffle: s must be >= 1");
    if (x.c % (s * s) != 0) {
        throw InvalidArgument("pixel_shuffle: channels not divisible by s^2");
    }
    const int cout = x.c / (s * s);
    TensorT<T> y(x.n, x.h * s, x.w * s, cout);
    for (int in = 0; in < x.n; ++in)
        for (int iy = 0; iy < x.h; ++iy)
            for (int ix = 0; ix < x.w; ++ix)
                for (int dy = 0; dy < s; ++dy)
                    for (int dx = 0; dx < s; ++dx)
                        for (int ch = 0; ch < cout; ++ch) {
                            y.at(in, iy * s + dy, ix * s + dx, ch) =
                                x.at(in, iy, ix, (dy * s + dx) * cout + ch);
                        }
    return y;
}

// Exact inverse of pixel_shuffle (also its gradient).
template <typename T>
TensorT<T> pixel_unshuffle(const TensorT<T>& y, int s) {
    if (s < 1) throw InvalidArgument("pixel_unshuffle: s must be >= 1");
    if (y.h % s != 0 || y.w % s != 0) {
        throw InvalidArgument("pixel_unshuffle: dims not divisible by s");
    }
    const int cout = y.c;
    TensorT<T> x(y.n, y.h / s, y.w / s, cout * s * s);
    for (int in = 0; in < y.n; ++in)
        for (int iy = 0; iy < x.h; ++iy)
            for (int ix = 0; ix < x.w; ++ix)
                for (int dy = 0; dy < s; ++dy)
                    for (int dx = 0; dx < s; ++dx)
                        for (int ch = 0; ch < cout; ++ch) {
                            x.at(in, iy, ix, (dy * s + dx) * cout + ch) =
                                y.at(in, iy * s + dy, ix * s + dx, ch);
                        }
    return x;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    if (!a.same_shape(b)) throw InvalidArgument("add: shape mismatch");
    TensorT<T> y(a.n, a.h, a.w, a.c);
    for (std::size_t i = 0; i < a.size(); ++i) y.data[i] = a.data[i] + b.data[i];
    return y;
}

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w) {
        throw InvalidArgument("concat: spatial dims differ");
    }
    TensorT<T> y(a.n, a.h, a.w, a.c + b.c);
    const std::size_t pixels = static_cast<std::size_t>(a.n) * a.h * a.w;
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int ch = 0; ch < a.c; ++ch) y.data[i * y.c + ch] = a.data[i * a.c + ch];
        for (int ch = 0; ch < b.c; ++ch) y.data[i * y.c + a.c + ch] = b.data[i * b.c + ch];
    }
    return y;
}

template <typename T>
void concat_backward(const TensorT<T>& dy, TensorT<T>& da, TensorT<T>& db) {
    const std::size_t pixels = static_cast<std::size_t>(dy.n) * dy.h * dy.w;
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int ch = 0; ch < da.c; ++ch) da.data[i * da.c + ch] = dy.data[i * dy.c + ch];
        for (int ch = 0; ch < db.c; ++ch) db.data[i * db.c + ch] = dy.data[i * dy.c + da.c + ch];
    }
}

}  // namespace shht::ref
