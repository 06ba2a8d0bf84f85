#include "sparsepose/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace sparsepose {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace kernels {

using idx = std::ptrdiff_t;

void linear(const Matrix& x, const Matrix& w, std::span<const double> b, Matrix& y) {
  if (x.cols() != w.rows() || b.size() != w.cols())
    throw std::invalid_argument("linear: shape mismatch");
  if (y.rows() != x.rows() || y.cols() != w.cols()) y = Matrix(x.rows(), w.cols());
  const idx n = static_cast<idx>(x.rows());
  const std::size_t in = w.rows();
  const std::size_t out = w.cols();
#pragma omp parallel for schedule(static)
  for (idx r = 0; r < n; ++r) {
    auto yr = y.row(static_cast<std::size_t>(r));
    const auto xr = x.row(static_cast<std::size_t>(r));
    std::copy(b.begin(), b.end(), yr.begin());
    for (std::size_t k = 0; k < in; ++k) {
      const double a = xr[k];
      const auto wk = w.row(k);
      for (std::size_t j = 0; j < out; ++j) yr[j] += a * wk[j];
    }
  }
}

void layer_norm(const Matrix& x, std::span<const double> scale, std::span<const double> offset, Matrix& y,
                double eps) {
  const std::size_t c = x.cols();
  if (scale.size() != c || offset.size() != c) throw std::invalid_argument("layer_norm: shape mismatch");
  if (y.rows() != x.rows() || y.cols() != c) y = Matrix(x.rows(), c);
  const idx n = static_cast<idx>(x.rows());
#pragma omp parallel for schedule(static)
  for (idx r = 0; r < n; ++r) {
    const auto xr = x.row(static_cast<std::size_t>(r));
    auto yr = y.row(static_cast<std::size_t>(r));
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(c);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) yr[j] = (xr[j] - mean) * inv * scale[j] + offset[j];
  }
}

void gelu_inplace(Matrix& x) {
  auto d = x.data();
  const idx n = static_cast<idx>(d.size());
#pragma omp parallel for schedule(static)
  for (idx i = 0; i < n; ++i) {
    const double v = d[static_cast<std::size_t>(i)];
    d[static_cast<std::size_t>(i)] = 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2));
  }
}

void add_inplace(Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("add_inplace: shape mismatch");
  auto d = x.data();
  const auto s = y.data();
  const idx n = static_cast<idx>(d.size());
#pragma omp parallel for schedule(static)
  for (idx i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] += s[static_cast<std::size_t>(i)];
}

void softmax_rows(Matrix& scores) {
  const idx n = static_cast<idx>(scores.rows());
#pragma omp parallel for schedule(static)
  for (idx r = 0; r < n; ++r) {
    auto row = scores.row(static_cast<std::size_t>(r));
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
}

Matrix attention_probabilities(const Matrix& q, const Matrix& k, int heads, int head) {
  if (q.cols() != k.cols() || heads <= 0 || q.cols() % static_cast<std::size_t>(heads) != 0)
    throw std::invalid_argument("attention: bad head split");
  const std::size_t d = q.cols() / static_cast<std::size_t>(heads);
  const std::size_t off = static_cast<std::size_t>(head) * d;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix s(q.rows(), k.rows());
  const idx n = static_cast<idx>(q.rows());
#pragma omp parallel for schedule(static)
  for (idx i = 0; i < n; ++i) {
    const auto qi = q.row(static_cast<std::size_t>(i)).subspan(off, d);
    auto si = s.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < k.rows(); ++j) {
      const auto kj = k.row(j).subspan(off, d);
      double dot = 0.0;
      for (std::size_t t = 0; t < d; ++t) dot += qi[t] * kj[t];
      si[j] = dot * scale;
    }
  }
  softmax_rows(s);
  return s;
}

Matrix multi_head_attention(const Matrix& q, const Matrix& k, const Matrix& v, int heads) {
  if (k.rows() != v.rows() || v.cols() != q.cols()) throw std::invalid_argument("attention: shape mismatch");
  const std::size_t d = q.cols() / static_cast<std::size_t>(heads);
  Matrix out(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    const Matrix p = attention_probabilities(q, k, heads, h);
    const std::size_t off = static_cast<std::size_t>(h) * d;
    const idx n = static_cast<idx>(q.rows());
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < n; ++i) {
      auto oi = out.row(static_cast<std::size_t>(i)).subspan(off, d);
      const auto pi = p.row(static_cast<std::size_t>(i));
      for (std::size_t j = 0; j < v.rows(); ++j) {
        const double a = pi[j];
        const auto vj = v.row(j).subspan(off, d);
        for (std::size_t t = 0; t < d; ++t) oi[t] += a * vj[t];
      }
    }
  }
  return out;
}

Tensor3 conv_transpose2d(const Tensor3& input, std::span<const double> weight, std::size_t out_channels,
                         int kernel, int stride, int pad) {
  const std::size_t cin = input.dim0();
  const idx ih = static_cast<idx>(input.dim1());
  const idx iw = static_cast<idx>(input.dim2());
  const std::size_t kk = static_cast<std::size_t>(kernel) * static_cast<std::size_t>(kernel);
  if (weight.size() != cin * out_channels * kk) throw std::invalid_argument("conv_transpose2d: weight size");
  const idx oh = (ih - 1) * stride - 2 * pad + kernel;
  const idx ow = (iw - 1) * stride - 2 * pad + kernel;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv_transpose2d: empty output");
  Tensor3 out(out_channels, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow));

  // One job per output row. Each row gathers from the input rows whose taps
  // land on it; the per-pixel summation order is (ic, ky, kx) regardless of
  // the thread count.
  const idx total = static_cast<idx>(out_channels) * oh;
#pragma omp parallel for schedule(static)
  for (idx job = 0; job < total; ++job) {
    const std::size_t oc = static_cast<std::size_t>(job / oh);
    const idx oy = job % oh;
    double* row = &out(oc, static_cast<std::size_t>(oy), 0);
    for (std::size_t ic = 0; ic < cin; ++ic) {
      const double* w = weight.data() + (ic * out_channels + oc) * kk;
      for (int ky = 0; ky < kernel; ++ky) {
        const idx ty = oy + pad - ky;
        if (ty < 0 || ty % stride != 0 || ty / stride >= ih) continue;
        const double* in = input.data().data() + (ic * static_cast<std::size_t>(ih) + static_cast<std::size_t>(ty / stride)) * static_cast<std::size_t>(iw);
        for (int kx = 0; kx < kernel; ++kx) {
          const double wk = w[static_cast<std::size_t>(ky * kernel + kx)];
          // ox = ix * stride - pad + kx, kept inside [0, ow).
          idx ix = kx >= pad ? 0 : (pad - kx + stride - 1) / stride;
          for (idx ox = ix * stride - pad + kx; ix < iw && ox < ow; ++ix, ox += stride)
            row[ox] += in[ix] * wk;
        }
      }
    }
  }
  return out;
}

void batch_norm_relu_inplace(Tensor3& x, std::span<const double> mean, std::span<const double> var,
                             std::span<const double> gamma, std::span<const double> beta, double eps) {
  const std::size_t c = x.dim0();
  if (mean.size() != c || var.size() != c || gamma.size() != c || beta.size() != c)
    throw std::invalid_argument("batch_norm: channel mismatch");
  const std::size_t plane = x.dim1() * x.dim2();
  auto d = x.data();
#pragma omp parallel for schedule(static)
  for (idx ch = 0; ch < static_cast<idx>(c); ++ch) {
    const std::size_t u = static_cast<std::size_t>(ch);
    const double a = gamma[u] / std::sqrt(var[u] + eps);
    const double b = beta[u] - a * mean[u];
    for (std::size_t i = u * plane; i < (u + 1) * plane; ++i) d[i] = std::max(0.0, a * d[i] + b);
  }
}

Tensor3 conv1x1(const Tensor3& input, const Matrix& weight, std::span<const double> bias) {
  if (weight.cols() != input.dim0() || bias.size() != weight.rows())
    throw std::invalid_argument("conv1x1: shape mismatch");
  const std::size_t plane = input.dim1() * input.dim2();
  Tensor3 out(weight.rows(), input.dim1(), input.dim2());
  const auto in = input.data();
  auto o = out.data();
#pragma omp parallel for schedule(static)
  for (idx oc = 0; oc < static_cast<idx>(weight.rows()); ++oc) {
    const std::size_t u = static_cast<std::size_t>(oc);
    double* dst = o.data() + u * plane;
    std::fill(dst, dst + plane, bias[u]);
    for (std::size_t ic = 0; ic < input.dim0(); ++ic) {
      const double w = weight(u, ic);
      const double* src = in.data() + ic * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

}  // namespace kernels
}  // namespace sparsepose
