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

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "emojigan/tensor.hpp"

namespace emojigan {

/// Compares tape gradients of the scalar function `f` against central
/// differences with step `h`, perturbing every element of every tensor in
/// `wrt` in place. Returns the largest
///   |analytic - numeric| / max(1, |analytic|, |numeric|).
/// `f` reads the tensors in `wrt` through captured handles. Gradients and
/// requires_grad flags of `wrt` are restored on return.
template <class T>
T grad_check(const std::function<Tensor<T>()>& f, std::vector<Tensor<T>> wrt, T h) {
  std::vector<bool> flags;
  for (auto& t : wrt) {
    flags.push_back(t.requires_grad());
    t.zero_grad();
    t.set_requires_grad(true);
  }

  std::vector<std::vector<T>> analytic;
  {
    Tape<T> tape;
    Tensor<T> y;
    {
      TapeScope<T> scope(tape);
      y = f();
    }
    if (y.numel() != 1) throw DimensionError("grad_check: function must be scalar-valued");
    tape.backward(y);
    for (auto& t : wrt) {
      auto g = t.grad();
      analytic.emplace_back(g.begin(), g.end());
    }
  }

  auto eval = [&] {
    NoGradScope<T> no_grad;
    return f().item();
  };

  T worst = T(0);
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    auto data = wrt[k].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const T saved = data[i];
      data[i] = saved + h;
      const T plus = eval();
      data[i] = saved - h;
      const T minus = eval();
      data[i] = saved;
      const T numeric = (plus - minus) / (T(2) * h);
      const T a = analytic[k][i];
      const T denom = std::max({T(1), std::abs(a), std::abs(numeric)});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }

  for (std::size_t k = 0; k < wrt.size(); ++k) {
    wrt[k].zero_grad();
    wrt[k].set_requires_grad(flags[k]);
  }
  return worst;
}

/// Single-input form: f maps x to a scalar.
template <class T>
T grad_check(const std::function<Tensor<T>(const Tensor<T>&)>& f, Tensor<T> x, T h) {
  return grad_check<T>([&f, x] { return f(x); }, std::vector<Tensor<T>>{x}, h);
}

}  // namespace emojigan
