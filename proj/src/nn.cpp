// Copyright 2026 The emojigan Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emojigan/nn.hpp"

#include <Eigen/Core>
#include <cmath>
#include <memory>

namespace emojigan {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Map = Eigen::Map<RowMat<T>>;
template <class T>
using CMap = Eigen::Map<const RowMat<T>>;

/// Sliding-window geometry of a convolution over an image of
/// channels x height x width producing out_h x out_w positions.
struct Window {
  std::size_t channels, height, width;
  std::size_t kh, kw, stride, padding;
  std::size_t out_h, out_w;

  std::size_t rows() const { return channels * kh * kw; }
  std::size_t positions() const { return out_h * out_w; }
};

/// Writes the patches of one image into columns [col0, col0 + positions) of a
/// row-major matrix with row stride `ld`.
template <class T>
void im2col(const T* img, const Window& g, T* col, std::size_t ld, std::size_t col0) {
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T* row = col + ((c * g.kh + ki) * g.kw + kj) * ld + col0;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + ki) - static_cast<long>(g.padding);
          T* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= static_cast<long>(g.height)) {
            std::fill_n(dst, g.out_w, T(0));
            continue;
          }
          const T* src = img + (c * g.height + ih) * g.width;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const long iw = static_cast<long>(ow * g.stride + kj) - static_cast<long>(g.padding);
            dst[ow] = iw < 0 || iw >= static_cast<long>(g.width) ? T(0) : src[iw];
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-adds columns back into one image.
template <class T>
void col2im(const T* col, const Window& g, T* img, std::size_t ld, std::size_t col0) {
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T* row = col + ((c * g.kh + ki) * g.kw + kj) * ld + col0;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + ki) - static_cast<long>(g.padding);
          if (ih < 0 || ih >= static_cast<long>(g.height)) continue;
          const T* src = row + oh * g.out_w;
          T* dst = img + (c * g.height + ih) * g.width;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const long iw = static_cast<long>(ow * g.stride + kj) - static_cast<long>(g.padding);
            if (iw >= 0 && iw < static_cast<long>(g.width)) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

template <class T>
void check_bias(const Tensor<T>& bias, std::size_t channels, const char* op) {
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != channels))
    throw DimensionError(std::string(op) + ": bias shape " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(channels) + " output channels");
}

template <class T>
void normal_fill(Tensor<T>& t, Rng& rng, double stddev) {
  for (auto& v : t.data()) v = static_cast<T>(rng.normal(0.0, stddev));
}

}  // namespace

std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (kernel == 0 || stride == 0) throw DimensionError("conv: kernel and stride must be positive");
  const long span = static_cast<long>(in + 2 * padding) - static_cast<long>(kernel);
  if (span < 0)
    throw DimensionError("conv: kernel " + std::to_string(kernel) + " larger than padded input " +
                         std::to_string(in + 2 * padding));
  return static_cast<std::size_t>(span) / stride + 1;
}

std::size_t deconv_out_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (kernel == 0 || stride == 0 || in == 0) throw DimensionError("deconv: kernel, stride and input must be positive");
  const long out = static_cast<long>((in - 1) * stride + kernel) - static_cast<long>(2 * padding);
  if (out < 1) throw DimensionError("deconv: output size " + std::to_string(out) + " < 1");
  return static_cast<std::size_t>(out);
}

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding) {
  if (x.rank() != 4 || weight.rank() != 4)
    throw DimensionError("conv2d: expected x [N,C,H,W] and weight [O,C,kh,kw], got " + shape_str(x.shape()) +
                         " and " + shape_str(weight.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = weight.dim(0);
  if (weight.dim(1) != c)
    throw DimensionError("conv2d: input has " + std::to_string(c) + " channels, weight expects " +
                         std::to_string(weight.dim(1)));
  check_bias(bias, o, "conv2d");
  const Window g{c, h, w, weight.dim(2), weight.dim(3), stride, padding,
                 conv_out_size(h, weight.dim(2), stride, padding), conv_out_size(w, weight.dim(3), stride, padding)};
  const std::size_t p = g.positions(), rows = g.rows(), ld = n * p;

  auto cols = std::make_shared<std::vector<T>>(rows * ld);
  for (std::size_t s = 0; s < n; ++s) im2col(x.data().data() + s * c * h * w, g, cols->data(), ld, s * p);

  RowMat<T> y = CMap<T>(weight.data().data(), o, rows) * CMap<T>(cols->data(), rows, ld);
  Tensor<T> out({n, o, g.out_h, g.out_w});
  T* dst = out.data().data();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < o; ++k) {
      const T b = bias.defined() ? bias[k] : T(0);
      for (std::size_t q = 0; q < p; ++q) dst[(s * o + k) * p + q] = y(k, s * p + q) + b;
    }
  check_finite(out, "conv2d");

  const bool has_bias = bias.defined();
  Tape<T>* tape = has_bias ? recording_tape(x, weight, bias) : recording_tape(x, weight);
  if (tape) {
    out.set_requires_grad(true);
    auto xs = x.storage(), ws = weight.storage(), os = out.storage();
    auto bs = has_bias ? bias.storage() : nullptr;
    std::vector<typename Tensor<T>::StoragePtr> ins{xs, ws};
    if (bs) ins.push_back(bs);
    tape->record("conv2d", ins, os, [xs, ws, bs, os, cols, g, n, o, p, rows, ld] {
      RowMat<T> dy(o, ld);
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t k = 0; k < o; ++k)
          for (std::size_t q = 0; q < p; ++q) dy(k, s * p + q) = os->grad[(s * o + k) * p + q];
      if (ws->requires_grad) {
        ws->ensure_grad();
        Map<T>(ws->grad.data(), o, rows).noalias() += dy * CMap<T>(cols->data(), rows, ld).transpose();
      }
      if (bs && bs->requires_grad) {
        bs->ensure_grad();
        for (std::size_t k = 0; k < o; ++k) bs->grad[k] += dy.row(k).sum();
      }
      if (xs->requires_grad) {
        xs->ensure_grad();
        RowMat<T> dcols = CMap<T>(ws->data.data(), o, rows).transpose() * dy;
        const std::size_t img = g.channels * g.height * g.width;
        for (std::size_t s = 0; s < n; ++s) col2im(dcols.data(), g, xs->grad.data() + s * img, ld, s * p);
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> deconv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                   std::size_t padding) {
  if (x.rank() != 4 || weight.rank() != 4)
    throw DimensionError("deconv2d: expected x [N,I,H,W] and weight [I,O,kh,kw], got " + shape_str(x.shape()) +
                         " and " + shape_str(weight.shape()));
  const std::size_t n = x.dim(0), in_ch = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (weight.dim(0) != in_ch)
    throw DimensionError("deconv2d: input has " + std::to_string(in_ch) + " channels, weight expects " +
                         std::to_string(weight.dim(0)));
  const std::size_t o = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
  check_bias(bias, o, "deconv2d");
  const std::size_t out_h = deconv_out_size(h, kh, stride, padding);
  const std::size_t out_w = deconv_out_size(w, kw, stride, padding);
  // Geometry of the conv2d this op is the adjoint of: it maps the output
  // image back onto the h x w input grid.
  const Window g{o, out_h, out_w, kh, kw, stride, padding, h, w};
  const std::size_t pin = h * w, rows = g.rows(), ld = n * pin;

  auto xmat = std::make_shared<RowMat<T>>(in_ch, ld);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < in_ch; ++i)
      for (std::size_t q = 0; q < pin; ++q) (*xmat)(i, s * pin + q) = x[(s * in_ch + i) * pin + q];

  RowMat<T> cols = CMap<T>(weight.data().data(), in_ch, rows).transpose() * (*xmat);
  Tensor<T> out({n, o, out_h, out_w});
  const std::size_t img = o * out_h * out_w;
  for (std::size_t s = 0; s < n; ++s) {
    T* dst = out.data().data() + s * img;
    col2im(cols.data(), g, dst, ld, s * pin);
    if (bias.defined())
      for (std::size_t k = 0; k < o; ++k)
        for (std::size_t q = 0; q < out_h * out_w; ++q) dst[k * out_h * out_w + q] += bias[k];
  }
  check_finite(out, "deconv2d");

  const bool has_bias = bias.defined();
  Tape<T>* tape = has_bias ? recording_tape(x, weight, bias) : recording_tape(x, weight);
  if (tape) {
    out.set_requires_grad(true);
    auto xs = x.storage(), ws = weight.storage(), os = out.storage();
    auto bs = has_bias ? bias.storage() : nullptr;
    std::vector<typename Tensor<T>::StoragePtr> ins{xs, ws};
    if (bs) ins.push_back(bs);
    tape->record("deconv2d", ins, os, [xs, ws, bs, os, xmat, g, n, in_ch, o, pin, rows, ld, img] {
      RowMat<T> dcols(rows, ld);
      for (std::size_t s = 0; s < n; ++s) im2col(os->grad.data() + s * img, g, dcols.data(), ld, s * pin);
      if (xs->requires_grad) {
        xs->ensure_grad();
        RowMat<T> dx = CMap<T>(ws->data.data(), in_ch, rows) * dcols;
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t i = 0; i < in_ch; ++i)
            for (std::size_t q = 0; q < pin; ++q) xs->grad[(s * in_ch + i) * pin + q] += dx(i, s * pin + q);
      }
      if (ws->requires_grad) {
        ws->ensure_grad();
        Map<T>(ws->grad.data(), in_ch, rows).noalias() += (*xmat) * dcols.transpose();
      }
      if (bs && bs->requires_grad) {
        bs->ensure_grad();
        const std::size_t plane = img / o;
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t k = 0; k < o; ++k) {
            T acc = T(0);
            for (std::size_t q = 0; q < plane; ++q) acc += os->grad[s * img + k * plane + q];
            bs->grad[k] += acc;
          }
      }
    });
  }
  return out;
}

namespace {

struct BnLayout {
  std::size_t n, c, spatial;
  std::size_t count() const { return n * spatial; }
  std::size_t at(std::size_t s, std::size_t ch, std::size_t q) const { return (s * c + ch) * spatial + q; }
};

template <class T>
BnLayout bn_layout(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, const char* op) {
  if (x.rank() < 2) throw DimensionError(std::string(op) + ": expected [N,C,...], got " + shape_str(x.shape()));
  const std::size_t c = x.dim(1);
  if (gamma.numel() != c || beta.numel() != c)
    throw DimensionError(std::string(op) + ": affine parameters do not match " + std::to_string(c) + " channels");
  return {x.dim(0), c, x.numel() / (x.dim(0) * c)};
}

}  // namespace

template <class T>
Tensor<T> batchnorm_train(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                          Tensor<T>& running_mean, Tensor<T>& running_var, T eps, T momentum) {
  const BnLayout L = bn_layout(x, gamma, beta, "batchnorm");
  const std::size_t m = L.count();
  if (m < 2)
    throw DimensionError("batchnorm: training mode needs at least 2 values per channel, got shape " +
                         shape_str(x.shape()));
  auto xhat = std::make_shared<std::vector<T>>(x.numel());
  auto inv_std = std::make_shared<std::vector<T>>(L.c);
  Tensor<T> out(x.shape());
  for (std::size_t ch = 0; ch < L.c; ++ch) {
    double acc = 0.0;
    for (std::size_t s = 0; s < L.n; ++s)
      for (std::size_t q = 0; q < L.spatial; ++q) acc += x[L.at(s, ch, q)];
    const double mu = acc / static_cast<double>(m);
    double sq = 0.0;
    for (std::size_t s = 0; s < L.n; ++s)
      for (std::size_t q = 0; q < L.spatial; ++q) {
        const double d = x[L.at(s, ch, q)] - mu;
        sq += d * d;
      }
    const double var = sq / static_cast<double>(m);
    const T inv = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    (*inv_std)[ch] = inv;
    for (std::size_t s = 0; s < L.n; ++s)
      for (std::size_t q = 0; q < L.spatial; ++q) {
        const std::size_t i = L.at(s, ch, q);
        (*xhat)[i] = (x[i] - static_cast<T>(mu)) * inv;
        out[i] = gamma[ch] * (*xhat)[i] + beta[ch];
      }
    const double unbiased = sq / static_cast<double>(m - 1);
    running_mean[ch] = (T(1) - momentum) * running_mean[ch] + momentum * static_cast<T>(mu);
    running_var[ch] = (T(1) - momentum) * running_var[ch] + momentum * static_cast<T>(unbiased);
  }
  check_finite(out, "batchnorm");

  if (auto* tape = recording_tape(x, gamma, beta)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), gs = gamma.storage(), bs = beta.storage(), os = out.storage();
    tape->record("batchnorm", {xs, gs, bs}, os, [xs, gs, bs, os, xhat, inv_std, L, m] {
      const auto& dy = os->grad;
      if (xs->requires_grad) xs->ensure_grad();
      if (gs->requires_grad) gs->ensure_grad();
      if (bs->requires_grad) bs->ensure_grad();
      for (std::size_t ch = 0; ch < L.c; ++ch) {
        T sum_dy = T(0), sum_dy_xhat = T(0);
        for (std::size_t s = 0; s < L.n; ++s)
          for (std::size_t q = 0; q < L.spatial; ++q) {
            const std::size_t i = L.at(s, ch, q);
            sum_dy += dy[i];
            sum_dy_xhat += dy[i] * (*xhat)[i];
          }
        if (gs->requires_grad) gs->grad[ch] += sum_dy_xhat;
        if (bs->requires_grad) bs->grad[ch] += sum_dy;
        if (xs->requires_grad) {
          const T k = gs->data[ch] * (*inv_std)[ch] / static_cast<T>(m);
          const T mt = static_cast<T>(m);
          for (std::size_t s = 0; s < L.n; ++s)
            for (std::size_t q = 0; q < L.spatial; ++q) {
              const std::size_t i = L.at(s, ch, q);
              xs->grad[i] += k * (mt * dy[i] - sum_dy - (*xhat)[i] * sum_dy_xhat);
            }
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> batchnorm_infer(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                          const Tensor<T>& running_mean, const Tensor<T>& running_var, T eps) {
  const BnLayout L = bn_layout(x, gamma, beta, "batchnorm_infer");
  auto inv_std = std::make_shared<std::vector<T>>(L.c);
  auto mu = std::make_shared<std::vector<T>>(L.c);
  for (std::size_t ch = 0; ch < L.c; ++ch) {
    (*inv_std)[ch] = T(1) / std::sqrt(running_var[ch] + eps);
    (*mu)[ch] = running_mean[ch];
  }
  Tensor<T> out(x.shape());
  for (std::size_t s = 0; s < L.n; ++s)
    for (std::size_t ch = 0; ch < L.c; ++ch)
      for (std::size_t q = 0; q < L.spatial; ++q) {
        const std::size_t i = L.at(s, ch, q);
        out[i] = gamma[ch] * (x[i] - (*mu)[ch]) * (*inv_std)[ch] + beta[ch];
      }
  check_finite(out, "batchnorm_infer");

  if (auto* tape = recording_tape(x, gamma, beta)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), gs = gamma.storage(), bs = beta.storage(), os = out.storage();
    tape->record("batchnorm_infer", {xs, gs, bs}, os, [xs, gs, bs, os, inv_std, mu, L] {
      const auto& dy = os->grad;
      if (xs->requires_grad) xs->ensure_grad();
      if (gs->requires_grad) gs->ensure_grad();
      if (bs->requires_grad) bs->ensure_grad();
      for (std::size_t s = 0; s < L.n; ++s)
        for (std::size_t ch = 0; ch < L.c; ++ch)
          for (std::size_t q = 0; q < L.spatial; ++q) {
            const std::size_t i = L.at(s, ch, q);
            if (xs->requires_grad) xs->grad[i] += dy[i] * gs->data[ch] * (*inv_std)[ch];
            if (gs->requires_grad) gs->grad[ch] += dy[i] * (xs->data[i] - (*mu)[ch]) * (*inv_std)[ch];
            if (bs->requires_grad) bs->grad[ch] += dy[i];
          }
    });
  }
  return out;
}

template <class T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (x.rank() != 2 || weight.rank() != 2)
    throw DimensionError("dense: expected x [N,in] and weight [out,in], got " + shape_str(x.shape()) + " and " +
                         shape_str(weight.shape()));
  const std::size_t n = x.dim(0), in = x.dim(1), o = weight.dim(0);
  if (weight.dim(1) != in)
    throw DimensionError("dense: input width " + std::to_string(in) + " does not match weight " +
                         shape_str(weight.shape()));
  check_bias(bias, o, "dense");
  Tensor<T> out({n, o});
  Map<T> y(out.data().data(), n, o);
  y.noalias() = CMap<T>(x.data().data(), n, in) * CMap<T>(weight.data().data(), o, in).transpose();
  if (bias.defined())
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < o; ++k) y(r, k) += bias[k];
  check_finite(out, "dense");

  const bool has_bias = bias.defined();
  Tape<T>* tape = has_bias ? recording_tape(x, weight, bias) : recording_tape(x, weight);
  if (tape) {
    out.set_requires_grad(true);
    auto xs = x.storage(), ws = weight.storage(), os = out.storage();
    auto bs = has_bias ? bias.storage() : nullptr;
    std::vector<typename Tensor<T>::StoragePtr> ins{xs, ws};
    if (bs) ins.push_back(bs);
    tape->record("dense", ins, os, [xs, ws, bs, os, n, in, o] {
      CMap<T> dy(os->grad.data(), n, o);
      if (xs->requires_grad) {
        xs->ensure_grad();
        Map<T>(xs->grad.data(), n, in).noalias() += dy * CMap<T>(ws->data.data(), o, in);
      }
      if (ws->requires_grad) {
        ws->ensure_grad();
        Map<T>(ws->grad.data(), o, in).noalias() += dy.transpose() * CMap<T>(xs->data.data(), n, in);
      }
      if (bs && bs->requires_grad) {
        bs->ensure_grad();
        for (std::size_t k = 0; k < o; ++k) bs->grad[k] += dy.col(k).sum();
      }
    });
  }
  return out;
}

template <class T>
Conv2d<T>::Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride_,
                  std::size_t padding_)
    : weight({out_ch, in_ch, kernel, kernel}), bias({out_ch}), stride(stride_), padding(padding_) {
  if (stride == 0) throw DimensionError("conv2d: stride must be positive");
}

template <class T>
void Conv2d<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, true});
}

template <class T>
Deconv2d<T>::Deconv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride_,
                      std::size_t padding_)
    : weight({in_ch, out_ch, kernel, kernel}), bias({out_ch}), stride(stride_), padding(padding_) {
  if (stride == 0) throw DimensionError("deconv2d: stride must be positive");
}

template <class T>
void Deconv2d<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, true});
}

template <class T>
BatchNorm<T>::BatchNorm(std::size_t channels)
    : gamma({channels}, T(1)), beta({channels}), running_mean({channels}), running_var({channels}, T(1)) {}

template <class T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, bool training) {
  if (training) return batchnorm_train(x, gamma, beta, running_mean, running_var, eps, momentum);
  return batchnorm_infer(x, gamma, beta, running_mean, running_var, eps);
}

template <class T>
void BatchNorm<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.push_back({prefix + ".gamma", gamma, true});
  out.push_back({prefix + ".beta", beta, true});
  out.push_back({prefix + ".running_mean", running_mean, false});
  out.push_back({prefix + ".running_var", running_var, false});
}

template <class T>
Dense<T>::Dense(std::size_t in, std::size_t out) : weight({out, in}), bias({out}) {}

template <class T>
void Dense<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, true});
}

template <class T>
void init_params(Conv2d<T>& layer, Rng& rng) {
  normal_fill(layer.weight, rng, kInitStddev);
  std::fill(layer.bias.data().begin(), layer.bias.data().end(), T(0));
}

template <class T>
void init_params(Deconv2d<T>& layer, Rng& rng) {
  normal_fill(layer.weight, rng, kInitStddev);
  std::fill(layer.bias.data().begin(), layer.bias.data().end(), T(0));
}

template <class T>
void init_params(BatchNorm<T>& layer, Rng&) {
  std::fill(layer.gamma.data().begin(), layer.gamma.data().end(), T(1));
  std::fill(layer.beta.data().begin(), layer.beta.data().end(), T(0));
  std::fill(layer.running_mean.data().begin(), layer.running_mean.data().end(), T(0));
  std::fill(layer.running_var.data().begin(), layer.running_var.data().end(), T(1));
}

template <class T>
void init_params(Dense<T>& layer, Rng& rng) {
  normal_fill(layer.weight, rng, kInitStddev);
  std::fill(layer.bias.data().begin(), layer.bias.data().end(), T(0));
}

#define EMOJIGAN_INSTANTIATE_NN(T)                                                                         \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t);   \
  template Tensor<T> deconv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t); \
  template Tensor<T> batchnorm_train(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,         \
                                     Tensor<T>&, T, T);                                                      \
  template Tensor<T> batchnorm_infer(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                     const Tensor<T>&, T);                                                   \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                              \
  template struct Conv2d<T>;                                                                               \
  template struct Deconv2d<T>;                                                                             \
  template struct BatchNorm<T>;                                                                            \
  template struct Dense<T>;                                                                                \
  template void init_params(Conv2d<T>&, Rng&);                                                             \
  template void init_params(Deconv2d<T>&, Rng&);                                                           \
  template void init_params(BatchNorm<T>&, Rng&);                                                          \
  template void init_params(Dense<T>&, Rng&);

EMOJIGAN_INSTANTIATE_NN(float)
EMOJIGAN_INSTANTIATE_NN(double)

}  // namespace emojigan
