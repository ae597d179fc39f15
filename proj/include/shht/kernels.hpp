#pragma once

// Production float kernels. Convolutions run as im2col + single-threaded
// BLAS GEMM; pointwise ops are OpenMP loops whose per-output accumulation
// order matches the serial reference exactly, so everything except the GEMM
// reduction order is bit-identical to shht::ref.

#include "shht/kernels_ref.hpp"
#include "shht/tensor.hpp"

namespace shht::kernels {

using ref::BnStats;

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);
Tensor conv2d_grad_input(const Tensor& dy, const Tensor& w, int stride, int pad,
                         int in_h, int in_w);
void conv2d_grad_params(const Tensor& dy, const Tensor& x, int stride, int pad,
                        Tensor& dw, Tensor& db);

Tensor batchnorm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       double eps, BnStats& stats);
Tensor batchnorm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                      const Tensor& run_mean, const Tensor& run_var, double eps);
Tensor batchnorm_backward(const Tensor& dy, const Tensor& x, const Tensor& gamma,
                          const BnStats& stats, Tensor& dgamma, Tensor& dbeta);

Tensor prelu(const Tensor& x, const Tensor& alpha);
Tensor prelu_backward(const Tensor& dy, const Tensor& x, const Tensor& alpha,
                      Tensor& dalpha);

Tensor pixel_shuffle(const Tensor& x, int s);
Tensor pixel_unshuffle(const Tensor& y, int s);

Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);
void concat_backward(const Tensor& dy, Tensor& da, Tensor& db);

}  // namespace shht::kernels

namespace shht::nnk {

// Scalar-type dispatch used by the network graph: float lands on the
// optimized kernels, other types on the templated reference path.

template <typename T, typename... A>
TensorT<T> conv2d(const TensorT<T>& x, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::conv2d(x, a...);
    else return ref::conv2d(x, a...);
}
template <typename T, typename... A>
TensorT<T> conv2d_grad_input(const TensorT<T>& dy, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::conv2d_grad_input(dy, a...);
    else return ref::conv2d_grad_input(dy, a...);
}
template <typename T, typename... A>
void conv2d_grad_params(const TensorT<T>& dy, A&&... a) {
    if constexpr (std::is_same_v<T, float>) kernels::conv2d_grad_params(dy, a...);
    else ref::conv2d_grad_params(dy, a...);
}
template <typename T, typename... A>
TensorT<T> batchnorm_train(const TensorT<T>& x, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::batchnorm_train(x, a...);
    else return ref::batchnorm_train(x, a...);
}
template <typename T, typename... A>
TensorT<T> batchnorm_eval(const TensorT<T>& x, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::batchnorm_eval(x, a...);
    else return ref::batchnorm_eval(x, a...);
}
template <typename T, typename... A>
TensorT<T> batchnorm_backward(const TensorT<T>& dy, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::batchnorm_backward(dy, a...);
    else return ref::batchnorm_backward(dy, a...);
}
template <typename T, typename... A>
TensorT<T> prelu(const TensorT<T>& x, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::prelu(x, a...);
    else return ref::prelu(x, a...);
}
template <typename T, typename... A>
TensorT<T> prelu_backward(const TensorT<T>& dy, A&&... a) {
    if constexpr (std::is_same_v<T, float>) return kernels::prelu_backward(dy, a...);
    else return ref::prelu_backward(dy, a...);
}
template <typename T>
TensorT<T> pixel_shuffle(const TensorT<T>& x, int s) {
    if constexpr (std::is_same_v<T, float>) return kernels::pixel_shuffle(x, s);
    else return ref::pixel_shuffle(x, s);
}
template <typename T>
TensorT<T> pixel_unshuffle(const TensorT<T>& y, int s) {
    if constexpr (std::is_same_v<T, float>) return kernels::pixel_unshuffle(y, s);
    else return ref::pixel_unshuffle(y, s);
}
template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    if constexpr (std::is_same_v<T, float>) return kernels::add(a, b);
    else return ref::add(a, b);
}
template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
    if constexpr (std::is_same_v<T, float>) return kernels::concat_channels(a, b);
    else return ref::concat_channels(a, b);
}
template <typename T>
void concat_backward(const TensorT<T>& dy, TensorT<T>& da, TensorT<T>& db) {
    if constexpr (std::is_same_v<T, float>) kernels::concat_backward(dy, da, db);
    else ref::concat_backward(dy, da, db);
}

}  // namespace shht::nnk
