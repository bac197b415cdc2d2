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

#pragma once

#include <string>
#include <vector>

#include "emojigan/rng.hpp"
#include "emojigan/tensor.hpp"

namespace emojigan {

/// floor((in + 2*padding - kernel) / stride) + 1; throws if < 1.
std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding);
/// (in - 1) * stride - 2*padding + kernel; throws if < 1.
std::size_t deconv_out_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding);

/// Cross-correlation (no kernel flip). x [N,C,H,W], weight [O,C,kh,kw],
/// bias [O] or undefined.
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding);

/// Transposed convolution, the exact adjoint of conv2d with the same stride
/// and padding. x [N,I,H,W], weight [I,O,kh,kw], bias [O] or undefined.
/// A conv2d weight [A,B,k,k] reused here as [I=A,O=B,k,k] gives
/// <conv2d(x), y> == <x, deconv2d(y)>.
template <class T>
Tensor<T> deconv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                   std::size_t padding);

/// Per-channel batch normalization over axes (N, spatial...) of x [N,C,...]
/// using batch statistics. Updates running stats in place:
///   running = (1 - momentum) * running + momentum * batch_stat
/// where the running variance takes the unbiased batch variance.
template <class T>
Tensor<T> batchnorm_train(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                          Tensor<T>& running_mean, Tensor<T>& running_var, T eps, T momentum);

/// Same normalization using the running statistics; pure in x.
template <class T>
Tensor<T> batchnorm_infer(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                          const Tensor<T>& running_mean, const Tensor<T>& running_var, T eps);

/// x [N,in], weight [out,in], bias [out] -> x * weight^T + bias.
template <class T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

/// A parameter or buffer with its dotted path, e.g. "generator.deconv0.weight".
template <class T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
  bool trainable = true;
};

template <class T>
using ParamList = std::vector<NamedTensor<T>>;

template <class T>
struct Conv2d {
  Tensor<T> weight;  // [out, in, k, k]
  Tensor<T> bias;    // [out]
  std::size_t stride = 1;
  std::size_t padding = 0;

  Conv2d() = default;
  Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride, std::size_t padding);

  Tensor<T> forward(const Tensor<T>& x) const { return conv2d(x, weight, bias, stride, padding); }
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <class T>
struct Deconv2d {
  Tensor<T> weight;  // [in, out, k, k]
  Tensor<T> bias;    // [out]
  std::size_t stride = 1;
  std::size_t padding = 0;

  Deconv2d() = default;
  Deconv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride, std::size_t padding);

  Tensor<T> forward(const Tensor<T>& x) const { return deconv2d(x, weight, bias, stride, padding); }
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <class T>
struct BatchNorm {
  Tensor<T> gamma, beta;
  Tensor<T> running_mean, running_var;
  T eps = T(1e-5);
  T momentum = T(0.1);

  BatchNorm() = default;
  explicit BatchNorm(std::size_t channels);

  Tensor<T> forward(const Tensor<T>& x, bool training);
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <class T>
struct Dense {
  Tensor<T> weight;  // [out, in]
  Tensor<T> bias;    // [out]

  Dense() = default;
  Dense(std::size_t in, std::size_t out);

  Tensor<T> forward(const Tensor<T>& x) const { return dense(x, weight, bias); }
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

// Weights ~ Normal(0, 0.02), biases 0; BatchNorm gamma 1, beta 0, running
// mean 0, running var 1.
template <class T> void init_params(Conv2d<T>& layer, Rng& rng);
template <class T> void init_params(Deconv2d<T>& layer, Rng& rng);
template <class T> void init_params(BatchNorm<T>& layer, Rng& rng);
template <class T> void init_params(Dense<T>& layer, Rng& rng);

inline constexpr double kInitStddev = 0.02;

}  // namespace emojigan
