#include "sparsepose/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <stdexcept>

namespace sparsepose::reference {

namespace {

Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
  Matrix y(x.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += x(i, k) * w(k, j);
      y(i, j) = s + b[j];
    }
  }
  return y;
}

Matrix norm(const Matrix& x, const std::vector<double>& scale, const std::vector<double>& offset) {
  Matrix y(x.rows(), x.cols());
  const double c = static_cast<double>(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean /= c;
    double var = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= c;
    for (std::size_t j = 0; j < x.cols(); ++j)
      y(i, j) = (x(i, j) - mean) / std::sqrt(var + 1e-6) * scale[j] + offset[j];
  }
  return y;
}

Tensor3 deconv_scatter(const Tensor3& in, const std::vector<double>& w, std::size_t cout) {
  const int k = kDeconvKernel, s = kDeconvStride, p = kDeconvPad;
  const auto ih = static_cast<int>(in.dim1()), iw = static_cast<int>(in.dim2());
  const int oh = (ih - 1) * s - 2 * p + k;
  const int ow = (iw - 1) * s - 2 * p + k;
  Tensor3 out(cout, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow));
  for (std::size_t ic = 0; ic < in.dim0(); ++ic)
    for (int y = 0; y < ih; ++y)
      for (int x = 0; x < iw; ++x)
        for (std::size_t oc = 0; oc < cout; ++oc)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int oy = y * s - p + ky;
              const int ox = x * s - p + kx;
              if (oy < 0 || ox < 0 || oy >= oh || ox >= ow) continue;
              out(oc, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox)) +=
                  in(ic, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) *
                  w[((ic * cout + oc) * static_cast<std::size_t>(k) + static_cast<std::size_t>(ky)) *
                        static_cast<std::size_t>(k) +
                    static_cast<std::size_t>(kx)];
            }
  return out;
}

void bn_relu(Tensor3& t, const std::vector<double>& mean, const std::vector<double>& var,
             const std::vector<double>& gamma, const std::vector<double>& beta) {
  for (std::size_t c = 0; c < t.dim0(); ++c)
    for (std::size_t y = 0; y < t.dim1(); ++y)
      for (std::size_t x = 0; x < t.dim2(); ++x) {
        const double v = (t(c, y, x) - mean[c]) / std::sqrt(var[c] + 1e-5) * gamma[c] + beta[c];
        t(c, y, x) = v > 0.0 ? v : 0.0;
      }
}

}  // namespace

Matrix patch_embed(const Image& image, const EncoderWeights& w) {
  const auto& g = w.grid;
  const int p = g.patch_size();
  const auto c = static_cast<std::size_t>(w.config.channels);
  Matrix out(static_cast<std::size_t>(g.size()), c);
  for (int row = 0; row < g.rows(); ++row) {
    for (int col = 0; col < g.cols(); ++col) {
      const auto t = static_cast<std::size_t>(row * g.cols() + col);
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        std::size_t k = 0;
        for (int py = 0; py < p; ++py)
          for (int px = 0; px < p; ++px)
            for (std::size_t ch = 0; ch < 3; ++ch, ++k)
              s += image(static_cast<std::size_t>(row * p + py), static_cast<std::size_t>(col * p + px), ch) *
                   w.patch_projection(k, j);
        out(t, j) = s + w.patch_bias[j] + w.positional(t, j);
      }
    }
  }
  return out;
}

Matrix transformer_forward(const Matrix& tokens, const EncoderWeights& w) {
  const std::size_t n = tokens.rows();
  const auto heads = static_cast<std::size_t>(w.config.heads);
  const std::size_t d = tokens.cols() / heads;
  Matrix x = tokens;
  for (const auto& l : w.layers) {
    const Matrix h = norm(x, l.norm1_scale, l.norm1_offset);
    const Matrix q = affine(h, l.query, l.query_bias);
    const Matrix k = affine(h, l.key, l.key_bias);
    const Matrix v = affine(h, l.value, l.value_bias);
    Matrix attended(n, tokens.cols());
    for (std::size_t hd = 0; hd < heads; ++hd) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> score(n);
        double mx = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
          double dot = 0.0;
          for (std::size_t t = 0; t < d; ++t) dot += q(i, hd * d + t) * k(j, hd * d + t);
          score[j] = dot / std::sqrt(static_cast<double>(d));
          mx = std::max(mx, score[j]);
        }
        double z = 0.0;
        for (double& s : score) z += (s = std::exp(s - mx));
        for (std::size_t t = 0; t < d; ++t) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += score[j] / z * v(j, hd * d + t);
          attended(i, hd * d + t) = acc;
        }
      }
    }
    const Matrix o = affine(attended, l.output, l.output_bias);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) += o(i, j);

    const Matrix h2 = norm(x, l.norm2_scale, l.norm2_offset);
    Matrix f = affine(h2, l.ffn_in, l.ffn_in_bias);
    for (double& e : f.data()) e = 0.5 * e * (1.0 + std::erf(e / std::sqrt(2.0)));
    const Matrix f2 = affine(f, l.ffn_out, l.ffn_out_bias);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) += f2(i, j);
  }
  return x;
}

Heatmap decode_head(const Featuremap& f, const DecoderWeights& w) {
  const auto d = static_cast<std::size_t>(w.config.hidden);
  Tensor3 in(f.dim2(), f.dim0(), f.dim1());
  for (std::size_t c = 0; c < f.dim2(); ++c)
    for (std::size_t y = 0; y < f.dim0(); ++y)
      for (std::size_t x = 0; x < f.dim1(); ++x) in(c, y, x) = f(y, x, c);

  Tensor3 b1 = deconv_scatter(in, w.deconv1, d);
  bn_relu(b1, w.bn1_mean, w.bn1_var, w.bn1_gamma, w.bn1_beta);
  Tensor3 b2 = deconv_scatter(b1, w.deconv2, d);
  bn_relu(b2, w.bn2_mean, w.bn2_var, w.bn2_gamma, w.bn2_beta);

  Heatmap h(w.head.rows(), b2.dim1(), b2.dim2());
  for (std::size_t k = 0; k < h.dim0(); ++k)
    for (std::size_t y = 0; y < h.dim1(); ++y)
      for (std::size_t x = 0; x < h.dim2(); ++x) {
        double s = w.head_bias[k];
        for (std::size_t c = 0; c < d; ++c) s += w.head(k, c) * b2(c, y, x);
        h(k, y, x) = s;
      }
  return h;
}

Heatmap dense_pipeline(const Image& image, const EncoderWeights& ew, const DecoderWeights& dw) {
  const Matrix tokens = reference::transformer_forward(reference::patch_embed(image, ew), ew);
  const auto& g = ew.grid;
  Featuremap f(static_cast<std::size_t>(g.rows()), static_cast<std::size_t>(g.cols()), tokens.cols());
  for (std::size_t t = 0; t < tokens.rows(); ++t)
    for (std::size_t c = 0; c < tokens.cols(); ++c)
      f(t / static_cast<std::size_t>(g.cols()), t % static_cast<std::size_t>(g.cols()), c) = tokens(t, c);
  return reference::decode_head(f, dw);
}

}  // namespace sparsepose::reference
