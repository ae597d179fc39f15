#include "shht/kernels.hpp"

#include <cblas.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace shht::kernels {

namespace {

// Gathers conv patches into a (rows = n*oh*ow) x (cols = kh*kw*cin) matrix.
// Column order matches the flattened (kh,kw,cin,cout) weight layout, so the
// weight tensor is already the right-hand GEMM operand without copying.
void im2col(const Tensor& x, int kh, int kw, int stride, int pad,
            int oh, int ow, std::vector<float>& cols) {
    const int cin = x.c;
    const std::size_t K = static_cast<std::size_t>(kh) * kw * cin;
    cols.assign(static_cast<std::size_t>(x.n) * oh * ow * K, 0.0f);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < static_cast<std::ptrdiff_t>(x.n) * oh * ow; ++row) {
        const int in = static_cast<int>(row / (static_cast<std::ptrdiff_t>(oh) * ow));
        const int rem = static_cast<int>(row % (static_cast<std::ptrdiff_t>(oh) * ow));
        const int oy = rem / ow;
        const int ox = rem % ow;
        float* dst = cols.data() + static_cast<std::size_t>(row) * K;
        for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= x.h) { dst += static_cast<std::size_t>(kw) * cin; continue; }
            for (int kx = 0; kx < kw; ++kx, dst += cin) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= x.w) continue;
                std::memcpy(dst, &x.data[x.index(in, iy, ix, 0)],
                            sizeof(float) * static_cast<std::size_t>(cin));
            }
        }
    }
}

// Scatter-add of column gradients back onto the input tensor.
void col2im_add(const std::vector<float>& cols, int kh, int kw, int stride, int pad,
                int oh, int ow, Tensor& dx) {
    const int cin = dx.c;
    const std::size_t K = static_cast<std::size_t>(kh) * kw * cin;
    // Overlapping patches write to the same input pixel; parallelize over
    // samples only so each sample's accumulation stays serial and ordered.
#pragma omp parallel for schedule(static)
    for (int in = 0; in < dx.n; ++in) {
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const std::size_t row =
                    (static_cast<std::size_t>(in) * oh + oy) * ow + ox;
                const float* src = cols.data() + row * K;
                for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= dx.h) { src += static_cast<std::size_t>(kw) * cin; continue; }
                    for (int kx = 0; kx < kw; ++kx, src += cin) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= dx.w) continue;
                        float* d = &dx.data[dx.index(in, iy, ix, 0)];
                        for (int ic = 0; ic < cin; ++ic) d[ic] += src[ic];
                    }
                }
            }
    }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
    const int kh = w.n, kw = w.h, cin = w.w, cout = w.c;
    if (x.c != cin) throw InvalidArgument("conv2d: channel mismatch");
    const int oh = ref::conv_out_dim<float>(x.h, kh, stride, pad);
    const int ow = ref::conv_out_dim<float>(x.w, kw, stride, pad);
    if (oh <= 0 || ow <= 0) throw InvalidArgument("conv2d: output would be empty");

    std::vector<float> cols;
    im2col(x, kh, kw, stride, pad, oh, ow, cols);
    const int rows = x.n * oh * ow;
    const int K = kh * kw * cin;

    Tensor y(x.n, oh, ow, cout);
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, rows, cout, K, 1.0f,
                cols.data(), K, w.data.data(), cout, 0.0f, y.data.data(), cout);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        float* dst = y.data.data() + static_cast<std::size_t>(r) * cout;
        for (int oc = 0; oc < cout; ++oc) dst[oc] += b.data[oc];
    }
    return y;
}

Tensor conv2d_grad_input(const Tensor& dy, const Tensor& w, int stride, int pad,
                         int in_h, int in_w) {
    const int kh = w.n, kw = w.h, cin = w.w, cout = w.c;
    const int rows = dy.n * dy.h * dy.w;
    const int K = kh * kw * cin;
    std::vector<float> dcols(static_cast<std::size_t>(rows) * K);
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, rows, K, cout, 1.0f,
                dy.data.data(), cout, w.data.data(), cout, 0.0f, dcols.data(), K);
    Tensor dx(dy.n, in_h, in_w, cin);
    col2im_add(dcols, kh, kw, stride, pad, dy.h, dy.w, dx);
    return dx;
}

void conv2d_grad_params(const Tensor& dy, const Tensor& x, int stride, int pad,
                        Tensor& dw, Tensor& db) {
    const int kh = dw.n, kw = dw.h, cin = dw.w, cout = dw.c;
    const int oh = dy.h, ow = dy.w;
    std::vector<float> cols;
    im2col(x, kh, kw, stride, pad, oh, ow, cols);
    const int rows = dy.n * oh * ow;
    const int K = kh * kw * cin;
    cblas_sgemm(CblasRowMajor, CblasTrans, CblasNoTrans, K, cout, rows, 1.0f,
                cols.data(), K, dy.data.data(), cout, 1.0f, dw.data.data(), cout);
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < cout; ++oc) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) {
            acc += dy.data[static_cast<std::size_t>(r) * cout + oc];
        }
        db.data[oc] += static_cast<float>(acc);
    }
}

Tensor batchnorm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       double eps, BnStats& stats) {
    const int C = x.c;
    const std::size_t per = x.size() / C;
    if (per == 0) throw InvalidArgument("batchnorm: empty input");
    stats.mean.assign(C, 0.0);
    stats.inv_std.assign(C, 0.0);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < C; ++ch) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const double v = x.data[i * C + ch];
            sum += v;
            sq += v * v;
        }
        const double mean = sum / static_cast<double>(per);
        double var = sq / static_cast<double>(per) - mean * mean;
        if (var < 0.0) var = 0.0;
        stats.mean[ch] = mean;
        stats.inv_std[ch] = 1.0 / std::sqrt(var + eps);
    }
    Tensor y(x.n, x.h, x.w, x.c);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(per); ++i) {
        for (int ch = 0; ch < C; ++ch) {
            const double xn = (x.data[i * C + ch] - stats.mean[ch]) * stats.inv_std[ch];
            y.data[i * C + ch] = static_cast<float>(gamma.data[ch] * xn + beta.data[ch]);
        }
    }
    return y;
}

Tensor batchnorm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                      const Tensor& run_mean, const Tensor& run_var, double eps) {
    const int C = x.c;
    Tensor y(x.n, x.h, x.w, x.c);
    std::vector<double> scale(C), shift(C);
    for (int ch = 0; ch < C; ++ch) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(run_var.data[ch]) + eps);
        scale[ch] = static_cast<double>(gamma.data[ch]) * inv;
        shift[ch] = static_cast<double>(beta.data[ch]) - scale[ch] * run_mean.data[ch];
    }
    const std::size_t per = x.size() / C;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(per); ++i) {
        for (int ch = 0; ch < C; ++ch) {
            y.data[i * C + ch] = static_cast<float>(scale[ch] * x.data[i * C + ch] + shift[ch]);
        }
    }
    return y;
}

Tensor batchnorm_backward(const Tensor& dy, const Tensor& x, const Tensor& gamma,
                          const BnStats& stats, Tensor& dgamma, Tensor& dbeta) {
    const int C = x.c;
    const std::size_t per = x.size() / C;
    const double n = static_cast<double>(per);
    Tensor dx(x.n, x.h, x.w, x.c);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < C; ++ch) {
        const double mean = stats.mean[ch];
        const double inv = stats.inv_std[ch];
        double sum_dy = 0.0, sum_dy_xn = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const double g = dy.data[i * C + ch];
            const double xn = (x.data[i * C + ch] - mean) * inv;
            sum_dy += g;
            sum_dy_xn += g * xn;
        }
        dgamma.data[ch] += static_cast<float>(sum_dy_xn);
        dbeta.data[ch] += static_cast<float>(sum_dy);
        const double gam = gamma.data[ch];
        for (std::size_t i = 0; i < per; ++i) {
            const double g = dy.data[i * C + ch];
            const double xn = (x.data[i * C + ch] - mean) * inv;
            dx.data[i * C + ch] =
                static_cast<float>(gam * inv * (g - sum_dy / n - xn * sum_dy_xn / n));
        }
    }
    return dx;
}

Tensor prelu(const Tensor& x, const Tensor& alpha) {
    Tensor y(x.n, x.h, x.w, x.c);
    const int C = x.c;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i) {
        const float v = x.data[i];
        y.data[i] = v > 0.0f ? v : alpha.data[i % C] * v;
    }
    return y;
}

Tensor prelu_backward(const Tensor& dy, const Tensor& x, const Tensor& alpha,
                      Tensor& dalpha) {
    Tensor dx(x.n, x.h, x.w, x.c);
    const int C = x.c;
    const std::size_t per = x.size() / C;
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < C; ++ch) {
        double da = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const float v = x.data[i * C + ch];
            const float g = dy.data[i * C + ch];
            if (v > 0.0f) {
                dx.data[i * C + ch] = g;
            } else {
                dx.data[i * C + ch] = alpha.data[ch] * g;
                da += static_cast<double>(g) * static_cast<double>(v);
            }
        }
        dalpha.data[ch] += static_cast<float>(da);
    }
    return dx;
}

Tensor pixel_shuffle(const Tensor& x, int s) {
    if (s < 1) throw InvalidArgument("pixel_shuffle: s must be >= 1");
    if (x.c % (s * s) != 0) throw InvalidArgument("pixel_shuffle: channels not divisible by s^2");
    const int cout = x.c / (s * s);
    Tensor y(x.n, x.h * s, x.w * s, cout);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(x.n) * x.h * x.w; ++p) {
        const int in = static_cast<int>(p / (static_cast<std::ptrdiff_t>(x.h) * x.w));
        const int rem = static_cast<int>(p % (static_cast<std::ptrdiff_t>(x.h) * x.w));
        const int iy = rem / x.w;
        const int ix = rem % x.w;
        const float* src = &x.data[x.index(in, iy, ix, 0)];
        for (int dy = 0; dy < s; ++dy)
            for (int dx = 0; dx < s; ++dx) {
                float* dst = &y.data[y.index(in, iy * s + dy, ix * s + dx, 0)];
                const float* blk = src + (dy * s + dx) * cout;
                for (int ch = 0; ch < cout; ++ch) dst[ch] = blk[ch];
            }
    }
    return y;
}

Tensor pixel_unshuffle(const Tensor& y, int s) {
    if (s < 1) throw InvalidArgument("pixel_unshuffle: s must be >= 1");
    if (y.h % s != 0 || y.w % s != 0) throw InvalidArgument("pixel_unshuffle: dims not divisible by s");
    const int cout = y.c;
    Tensor x(y.n, y.h / s, y.w / s, cout * s * s);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(x.n) * x.h * x.w; ++p) {
        const int in = static_cast<int>(p / (static_cast<std::ptrdiff_t>(x.h) * x.w));
        const int rem = static_cast<int>(p % (static_cast<std::ptrdiff_t>(x.h) * x.w));
        const int iy = rem / x.w;
        const int ix = rem % x.w;
        float* dst = &x.data[x.index(in, iy, ix, 0)];
        for (int dy = 0; dy < s; ++dy)
            for (int dx = 0; dx < s; ++dx) {
                const float* src = &y.data[y.index(in, iy * s + dy, ix * s + dx, 0)];
                float* blk = dst + (dy * s + dx) * cout;
                for (int ch = 0; ch < cout; ++ch) blk[ch] = src[ch];
            }
    }
    return x;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw InvalidArgument("add: shape mismatch");
    Tensor y(a.n, a.h, a.w, a.c);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i) {
        y.data[i] = a.data[i] + b.data[i];
    }
    return y;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w) throw InvalidArgument("concat: spatial dims differ");
    Tensor y(a.n, a.h, a.w, a.c + b.c);
    const std::size_t pixels = static_cast<std::size_t>(a.n) * a.h * a.w;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pixels); ++i) {
        std::memcpy(&y.data[static_cast<std::size_t>(i) * y.c], &a.data[static_cast<std::size_t>(i) * a.c],
                    sizeof(float) * a.c);
        std::memcpy(&y.data[static_cast<std::size_t>(i) * y.c + a.c],
                    &b.data[static_cast<std::size_t>(i) * b.c], sizeof(float) * b.c);
    }
    return y;
}

void concat_backward(const Tensor& dy, Tensor& da, Tensor& db) {
    const std::size_t pixels = static_cast<std::size_t>(dy.n) * dy.h * dy.w;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pixels); ++i) {
        std::memcpy(&da.data[static_cast<std::size_t>(i) * da.c], &dy.data[static_cast<std::size_t>(i) * dy.c],
                    sizeof(float) * da.c);
        std::memcpy(&db.data[static_cast<std::size_t>(i) * db.c],
                    &dy.data[static_cast<std::size_t>(i) * dy.c + da.c], sizeof(float) * db.c);
    }
}

}  // namespace shht::kernels
