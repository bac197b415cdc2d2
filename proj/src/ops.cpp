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

#include "emojigan/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace emojigan {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Element strides of `shape` aligned to an output of rank `rank`; stride 0
/// on broadcast (size-1 or missing) axes.
std::vector<std::size_t> broadcast_strides(const Shape& shape, const Shape& out) {
  const std::size_t rank = out.size();
  std::vector<std::size_t> strides(rank, 0);
  std::size_t stride = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const std::size_t axis = shape.size() - 1 - k;
    const std::size_t out_axis = rank - 1 - k;
    strides[out_axis] = shape[axis] == 1 && out[out_axis] != 1 ? 0 : stride;
    stride *= shape[axis];
  }
  return strides;
}

/// Calls fn(out_index, a_index, b_index) over every output element.
template <class Fn>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa, const std::vector<std::size_t>& sb,
                        Fn&& fn) {
  const std::size_t rank = out.size();
  const std::size_t total = shape_numel(out);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < total; ++i) {
    fn(i, ia, ib);
    for (std::size_t axis = rank; axis-- > 0;) {
      ++idx[axis];
      ia += sa[axis];
      ib += sb[axis];
      if (idx[axis] < out[axis]) break;
      ia -= sa[axis] * out[axis];
      ib -= sb[axis] * out[axis];
      idx[axis] = 0;
    }
  }
}

enum class Binary { kAdd, kSub, kMul };

template <class T>
Tensor<T> binary_op(const Tensor<T>& a, const Tensor<T>& b, Binary kind, const char* name) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  Tensor<T> out(out_shape);
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  const bool same = a.shape() == b.shape();
  const auto sa = broadcast_strides(a.shape(), out_shape);
  const auto sb = broadcast_strides(b.shape(), out_shape);

  auto apply = [&](std::size_t i, std::size_t ia, std::size_t ib) {
    switch (kind) {
      case Binary::kAdd: o[i] = x[ia] + y[ib]; break;
      case Binary::kSub: o[i] = x[ia] - y[ib]; break;
      case Binary::kMul: o[i] = x[ia] * y[ib]; break;
    }
  };
  if (same) {
    for (std::size_t i = 0; i < o.size(); ++i) apply(i, i, i);
  } else {
    for_each_broadcast(out_shape, sa, sb, apply);
  }
  check_finite(out, name);

  if (auto* tape = recording_tape(a, b)) {
    out.set_requires_grad(true);
    auto as = a.storage(), bs = b.storage(), os = out.storage();
    tape->record(name, {as, bs}, os, [as, bs, os, sa, sb, same, kind, out_shape] {
      const auto& go = os->grad;
      if (as->requires_grad) as->ensure_grad();
      if (bs->requires_grad) bs->ensure_grad();
      auto step = [&](std::size_t i, std::size_t ia, std::size_t ib) {
        const T g = go[i];
        switch (kind) {
          case Binary::kAdd:
            if (as->requires_grad) as->grad[ia] += g;
            if (bs->requires_grad) bs->grad[ib] += g;
            break;
          case Binary::kSub:
            if (as->requires_grad) as->grad[ia] += g;
            if (bs->requires_grad) bs->grad[ib] -= g;
            break;
          case Binary::kMul:
            if (as->requires_grad) as->grad[ia] += g * bs->data[ib];
            if (bs->requires_grad) bs->grad[ib] += g * as->data[ia];
            break;
        }
      };
      if (same) {
        for (std::size_t i = 0; i < go.size(); ++i) step(i, i, i);
      } else {
        for_each_broadcast(out_shape, sa, sb, step);
      }
    });
  }
  return out;
}

/// Shared scaffolding for y = f(x) elementwise with dy/dx = df(x, y).
template <class T, class F, class DF>
Tensor<T> unary_op(const Tensor<T>& x, const char* name, F f, DF df) {
  Tensor<T> out(x.shape());
  auto o = out.data();
  auto in = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(in[i]);
  check_finite(out, name);
  if (auto* tape = recording_tape(x)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), os = out.storage();
    tape->record(name, {xs}, os, [xs, os, df] {
      xs->ensure_grad();
      const auto& go = os->grad;
      for (std::size_t i = 0; i < go.size(); ++i) xs->grad[i] += go[i] * df(xs->data[i], os->data[i]);
    });
  }
  return out;
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1)
      throw DimensionError("broadcast: incompatible shapes " + shape_str(a) + " and " + shape_str(b));
    out[rank - 1 - k] = std::max(da, db);
  }
  return out;
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op(a, b, Binary::kAdd, "add");
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op(a, b, Binary::kSub, "sub");
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op(a, b, Binary::kMul, "mul");
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return unary_op(
      x, "scale", [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <class T>
Tensor<T> add_scalar(const Tensor<T>& x, T value) {
  return unary_op(
      x, "add_scalar", [value](T v) { return v + value; }, [](T, T) { return T(1); });
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw DimensionError("matmul: expected rank-2 operands, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul: inner dimensions differ in " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor<T> out({m, n});
  using Map = Eigen::Map<RowMat<T>>;
  using CMap = Eigen::Map<const RowMat<T>>;
  Map(out.data().data(), m, n).noalias() = CMap(a.data().data(), m, k) * CMap(b.data().data(), k, n);
  check_finite(out, "matmul");

  if (auto* tape = recording_tape(a, b)) {
    out.set_requires_grad(true);
    auto as = a.storage(), bs = b.storage(), os = out.storage();
    tape->record("matmul", {as, bs}, os, [as, bs, os, m, k, n] {
      CMap dc(os->grad.data(), m, n);
      if (as->requires_grad) {
        as->ensure_grad();
        Map(as->grad.data(), m, k).noalias() += dc * CMap(bs->data.data(), k, n).transpose();
      }
      if (bs->requires_grad) {
        bs->ensure_grad();
        Map(bs->grad.data(), k, n).noalias() += CMap(as->data.data(), m, k).transpose() * dc;
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary_op(
      x, "relu", [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  return unary_op(
      x, "leaky_relu", [slope](T v) { return v > T(0) ? v : slope * v; },
      [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

template <class T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary_op(
      x, "tanh", [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary_op(
      x, "sigmoid",
      [](T v) {
        // Split on sign so exp never overflows.
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Tensor<T> log(const Tensor<T>& x) {
  return unary_op(
      x, "log", [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <class T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
  return unary_op(
      x, "clamp", [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return v >= lo && v <= hi ? T(1) : T(0); });
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = T(0);
  for (T v : x.data()) acc += v;
  Tensor<T> out = Tensor<T>::scalar(acc);
  check_finite(out, "sum");
  if (auto* tape = recording_tape(x)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), os = out.storage();
    tape->record("sum", {xs}, os, [xs, os] {
      xs->ensure_grad();
      const T g = os->grad[0];
      for (auto& v : xs->grad) v += g;
    });
  }
  return out;
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  T acc = T(0);
  for (T v : x.data()) acc += v;
  const T inv = T(1) / static_cast<T>(x.numel());
  Tensor<T> out = Tensor<T>::scalar(acc * inv);
  check_finite(out, "mean");
  if (auto* tape = recording_tape(x)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), os = out.storage();
    tape->record("mean", {xs}, os, [xs, os, inv] {
      xs->ensure_grad();
      const T g = os->grad[0] * inv;
      for (auto& v : xs->grad) v += g;
    });
  }
  return out;
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  Tensor<T> out(std::move(shape), std::vector<T>(x.data().begin(), x.data().end()));
  if (auto* tape = recording_tape(x)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), os = out.storage();
    tape->record("reshape", {xs}, os, [xs, os] {
      xs->ensure_grad();
      for (std::size_t i = 0; i < os->grad.size(); ++i) xs->grad[i] += os->grad[i];
    });
  }
  return out;
}

template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_str(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) throw DimensionError("concat: shape " + shape_str(s) + " does not match " + shape_str(first));
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_row = out_shape[axis] * inner;

  Tensor<T> out(out_shape);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t row = p.dim(axis) * inner;
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(p.data().data() + o * row, row, out.data().data() + o * out_row + offset);
    offset += row;
  }

  Tape<T>* tape = Tape<T>::active();
  const bool any = std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.requires_grad(); });
  if (tape && any) {
    out.set_requires_grad(true);
    std::vector<typename Tensor<T>::StoragePtr> ins;
    for (const auto& p : parts) ins.push_back(p.storage());
    auto os = out.storage();
    tape->record("concat", ins, os, [ins, os, offsets, outer, inner, out_row, axis] {
      for (std::size_t k = 0; k < ins.size(); ++k) {
        auto& s = *ins[k];
        if (!s.requires_grad) continue;
        s.ensure_grad();
        const std::size_t row = s.shape[axis] * inner;
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t j = 0; j < row; ++j) s.grad[o * row + j] += os->grad[o * out_row + offsets[k] + j];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> broadcast_to(const Tensor<T>& x, const Shape& shape) {
  if (x.rank() != shape.size())
    throw DimensionError("broadcast_to: rank mismatch " + shape_str(x.shape()) + " -> " + shape_str(shape));
  for (std::size_t d = 0; d < shape.size(); ++d)
    if (x.dim(d) != shape[d] && x.dim(d) != 1)
      throw DimensionError("broadcast_to: cannot stretch " + shape_str(x.shape()) + " to " + shape_str(shape));
  const auto sx = broadcast_strides(x.shape(), shape);
  const std::vector<std::size_t> none(shape.size(), 0);
  Tensor<T> out(shape);
  auto o = out.data();
  auto in = x.data();
  for_each_broadcast(shape, sx, none, [&](std::size_t i, std::size_t ix, std::size_t) { o[i] = in[ix]; });
  if (auto* tape = recording_tape(x)) {
    out.set_requires_grad(true);
    auto xs = x.storage(), os = out.storage();
    tape->record("broadcast_to", {xs}, os, [xs, os, sx, none, shape] {
      xs->ensure_grad();
      for_each_broadcast(shape, sx, none,
                         [&](std::size_t i, std::size_t ix, std::size_t) { xs->grad[ix] += os->grad[i]; });
    });
  }
  return out;
}

#define EMOJIGAN_INSTANTIATE_OPS(T)                                                \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> scale(const Tensor<T>&, T);                                   \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                              \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> relu(const Tensor<T>&);                                       \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                              \
  template Tensor<T> tanh(const Tensor<T>&);                                       \
  template Tensor<T> sigmoid(const Tensor<T>&);                                    \
  template Tensor<T> log(const Tensor<T>&);                                        \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                \
  template Tensor<T> sum(const Tensor<T>&);                                        \
  template Tensor<T> mean(const Tensor<T>&);                                       \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                             \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);           \
  template Tensor<T> broadcast_to(const Tensor<T>&, const Shape&);

EMOJIGAN_INSTANTIATE_OPS(float)
EMOJIGAN_INSTANTIATE_OPS(double)

}  // namespace emojigan
