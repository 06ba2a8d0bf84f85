#pragma once

// OpenMP-parallel building blocks for the encoder and decoder. Every kernel
// parallelises over independent outputs and keeps each inner reduction in a
// fixed sequential order, so results are bitwise identical for any thread
// count. The serial reference in reference.hpp is the test oracle for these.

#include <span>
#include <vector>

#include "sparsepose/tensor.hpp"

namespace sparsepose::kernels {

/// y = x * w + b, with x (N x in), w (in x out), b (out).
void linear(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y);

/// Per-row normalisation to zero mean, unit variance, then scale/offset.
void layer_norm(const Matrix& x, std::span<const double> scale, std::span<const double> offset, Matrix& y,
                double eps = 1e-6);

/// Exact (erf) GELU.
void gelu_inplace(Matrix& x);

/// x += y.
void add_inplace(Matrix& x, const Matrix& y);

/// Row-wise softmax with max subtraction.
void softmax_rows(Matrix& scores);

/// Softmax(q_h k_h^T / sqrt(d)) for one head, where head h owns columns
/// [h*d, (h+1)*d) of q and k.
Matrix attention_probabilities(const Matrix& q, const Matrix& k, int heads, int head);

/// Concatenated per-head attention outputs (N x C), before the output
/// projection.
Matrix multi_head_attention(const Matrix& q, const Matrix& k, const Matrix& v, int heads);

/// Transposed 2-D convolution over a (C_in, H, W) input with weights laid out
/// [C_in][C_out][kernel][kernel]. Output size is (H-1)*stride - 2*pad + kernel.
Tensor3 conv_transpose2d(const Tensor3& input, std::span<const double> weight, std::size_t out_channels,
                         int kernel, int stride, int pad);

/// Per-channel inference-mode batch norm followed by ReLU, in place.
void batch_norm_relu_inplace(Tensor3& x, std::span<const double> mean, std::span<const double> var,
                             std::span<const double> gamma, std::span<const double> beta, double eps = 1e-5);

/// 1x1 convolution: (C_in, H, W) -> (C_out, H, W) with weight (C_out x C_in).
Tensor3 conv1x1(const Tensor3& input, const Matrix& weight, std::span<const double> bias);

}  // namespace sparsepose::kernels
