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

#include <vector>

#include "emojigan/tensor.hpp"

namespace emojigan {

/// Result shape of numpy-style broadcasting (right-aligned, size-1 axes
/// stretch). Throws DimensionError naming both shapes.
Shape broadcast_shape(const Shape& a, const Shape& b);

// Elementwise with broadcasting; gradients are summed over broadcast axes.
template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <class T> Tensor<T> scale(const Tensor<T>& x, T factor);
template <class T> Tensor<T> add_scalar(const Tensor<T>& x, T value);

/// [m,k] x [k,n] -> [m,n].
template <class T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// relu'(0) = 0; leaky_relu'(0) = slope.
template <class T> Tensor<T> relu(const Tensor<T>& x);
template <class T> Tensor<T> leaky_relu(const Tensor<T>& x, T slope);
template <class T> Tensor<T> tanh(const Tensor<T>& x);
template <class T> Tensor<T> sigmoid(const Tensor<T>& x);
template <class T> Tensor<T> log(const Tensor<T>& x);
/// Gradient passes where lo <= x <= hi, zero elsewhere.
template <class T> Tensor<T> clamp(const Tensor<T>& x, T lo, T hi);

template <class T> Tensor<T> sum(const Tensor<T>& x);
template <class T> Tensor<T> mean(const Tensor<T>& x);

template <class T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <class T> Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);
/// Stretches size-1 axes of x to `shape` (same rank required).
template <class T> Tensor<T> broadcast_to(const Tensor<T>& x, const Shape& shape);

template <class T> Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return add(a, b); }
template <class T> Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return sub(a, b); }
template <class T> Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return mul(a, b); }

#define EMOJIGAN_DECLARE_OPS(T)                                                           \
  extern template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                      \
  extern template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                      \
  extern template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                      \
  extern template Tensor<T> scale(const Tensor<T>&, T);                                   \
  extern template Tensor<T> add_scalar(const Tensor<T>&, T);                              \
  extern template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                   \
  extern template Tensor<T> relu(const Tensor<T>&);                                       \
  extern template Tensor<T> leaky_relu(const Tensor<T>&, T);                              \
  extern template Tensor<T> tanh(const Tensor<T>&);                                       \
  extern template Tensor<T> sigmoid(const Tensor<T>&);                                    \
  extern template Tensor<T> log(const Tensor<T>&);                                        \
  extern template Tensor<T> clamp(const Tensor<T>&, T, T);                                \
  extern template Tensor<T> sum(const Tensor<T>&);                                        \
  extern template Tensor<T> mean(const Tensor<T>&);                                       \
  extern template Tensor<T> reshape(const Tensor<T>&, Shape);                             \
  extern template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);           \
  extern template Tensor<T> broadcast_to(const Tensor<T>&, const Shape&);

EMOJIGAN_DECLARE_OPS(float)
EMOJIGAN_DECLARE_OPS(double)
#undef EMOJIGAN_DECLARE_OPS

}  // namespace emojigan
