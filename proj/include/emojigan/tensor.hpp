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

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emojigan/error.hpp"

namespace emojigan {

/// Dimension sizes, outermost first. The empty shape is a rank-0 scalar.
using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Debug-mode finite check on every forward op output. Defaults to on in
/// builds without NDEBUG.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

template <class T>
struct TensorStorage {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a backward pass reaches this tensor
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

/// Dense row-major n-d array taking part in reverse-mode differentiation.
///
/// Tensor is a handle: copies alias the same storage, exactly as parameters
/// held by layers alias the ones seen by the optimizer. Use clone() for a
/// deep copy and detach() for a copy cut from the gradient graph.
template <class T>
class Tensor {
 public:
  using value_type = T;
  using StoragePtr = std::shared_ptr<TensorStorage<T>>;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0)) : storage_(std::make_shared<TensorStorage<T>>()) {
    validate(shape);
    storage_->data.assign(shape_numel(shape), fill);
    storage_->shape = std::move(shape);
  }

  Tensor(Shape shape, std::vector<T> data) : storage_(std::make_shared<TensorStorage<T>>()) {
    validate(shape);
    if (shape_numel(shape) != data.size())
      throw DimensionError("tensor: shape " + shape_str(shape) + " needs " +
                           std::to_string(shape_numel(shape)) + " values, got " +
                           std::to_string(data.size()));
    storage_->shape = std::move(shape);
    storage_->data = std::move(data);
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T(0)); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }
  static Tensor scalar(T value) { return Tensor(Shape{}, value); }

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t numel() const { return storage_->data.size(); }

  std::span<T> data() { return storage_->data; }
  std::span<const T> data() const { return storage_->data; }
  T& operator[](std::size_t i) { return storage_->data[i]; }
  const T& operator[](std::size_t i) const { return storage_->data[i]; }

  T item() const {
    if (numel() != 1) throw DimensionError("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
    return storage_->data[0];
  }

  bool requires_grad() const { return storage_ && storage_->requires_grad; }
  Tensor& set_requires_grad(bool flag) {
    storage_->requires_grad = flag;
    return *this;
  }

  bool has_grad() const { return !storage_->grad.empty(); }
  /// Gradient buffer; allocated (zero-filled) on first access.
  std::span<T> grad() {
    storage_->ensure_grad();
    return storage_->grad;
  }
  std::span<const T> grad() const {
    storage_->ensure_grad();
    return storage_->grad;
  }
  void zero_grad() { storage_->grad.clear(); }

  Tensor clone() const {
    Tensor copy(shape(), storage_->data);
    copy.storage_->requires_grad = storage_->requires_grad;
    return copy;
  }
  Tensor detach() const { return Tensor(shape(), storage_->data); }

  const StoragePtr& storage() const { return storage_; }
  bool same_storage(const Tensor& other) const { return storage_ == other.storage_; }

 private:
  static void validate(const Shape& shape) {
    for (std::size_t d : shape)
      if (d == 0) throw DimensionError("tensor: zero-sized dimension in shape " + shape_str(shape));
  }

  StoragePtr storage_;
};

/// Ordered record of differentiable ops executed while the tape is active.
///
/// Each node keeps its inputs, its output and a closure that reads the
/// output gradient and accumulates into the inputs. backward() replays the
/// nodes strictly in reverse recording order, which is a valid reverse
/// topological order because an op's output is created after its inputs.
template <class T>
class Tape {
 public:
  using StoragePtr = typename Tensor<T>::StoragePtr;

  struct Node {
    std::string op;
    std::vector<StoragePtr> inputs;
    StoragePtr output;
    std::function<void()> backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::string op, std::vector<StoragePtr> inputs, StoragePtr output, std::function<void()> backward) {
    nodes_.push_back(Node{std::move(op), std::move(inputs), std::move(output), std::move(backward)});
  }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable tensor that
  /// requires grad. Leaf gradients accumulate across calls; intermediate
  /// gradients are recomputed from scratch on each call.
  void backward(const Tensor<T>& loss) {
    if (loss.numel() != 1)
      throw DimensionError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    visit_order_.clear();
    std::size_t end = nodes_.size();
    while (end > 0 && nodes_[end - 1].output != loss.storage()) --end;
    if (end == 0) {
      if (!loss.requires_grad()) throw std::logic_error("backward: loss was not recorded on this tape");
      loss.storage()->ensure_grad();
      loss.storage()->grad[0] += T(1);
      return;
    }
    for (auto& node : nodes_) node.output->grad.clear();
    loss.storage()->grad.assign(1, T(1));
    for (std::size_t i = end; i-- > 0;) {
      Node& node = nodes_[i];
      if (node.output->grad.empty()) continue;
      node.backward();
      visit_order_.push_back(i);
    }
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  /// Node indices executed by the most recent backward(), in execution order.
  const std::vector<std::size_t>& last_backward_order() const { return visit_order_; }
  void clear() {
    nodes_.clear();
    visit_order_.clear();
  }

  /// Tape that ops on this thread record into, or nullptr.
  static Tape* active() { return active_; }

 private:
  template <class U>
  friend class TapeScope;
  template <class U>
  friend class NoGradScope;

  static thread_local Tape* active_;

  std::vector<Node> nodes_;
  std::vector<std::size_t> visit_order_;
};

template <class T>
thread_local Tape<T>* Tape<T>::active_ = nullptr;

/// Makes `tape` the recording tape of this thread for the scope's lifetime.
template <class T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape) : previous_(Tape<T>::active_) { Tape<T>::active_ = &tape; }
  ~TapeScope() { Tape<T>::active_ = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

/// Suspends recording for the scope's lifetime.
template <class T>
class NoGradScope {
 public:
  NoGradScope() : previous_(Tape<T>::active_) { Tape<T>::active_ = nullptr; }
  ~NoGradScope() { Tape<T>::active_ = previous_; }
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* previous_;
};

/// Active tape if any of the inputs requires grad, else nullptr. Ops use this
/// to decide whether to record.
template <class T, class... Rest>
Tape<T>* recording_tape(const Tensor<T>& first, const Rest&... rest) {
  Tape<T>* tape = Tape<T>::active();
  if (tape == nullptr) return nullptr;
  const bool any = first.requires_grad() || (rest.requires_grad() || ...);
  return any ? tape : nullptr;
}

/// Registers a custom op's output on the active tape. `backward` must read
/// out.storage()->grad and accumulate into the inputs that require grad.
template <class T>
void record_op(std::string op, const std::vector<Tensor<T>>& inputs, Tensor<T>& out,
               std::function<void()> backward) {
  Tape<T>* tape = Tape<T>::active();
  if (tape == nullptr) return;
  bool any = false;
  std::vector<typename Tensor<T>::StoragePtr> storages;
  storages.reserve(inputs.size());
  for (const auto& in : inputs) {
    any = any || in.requires_grad();
    storages.push_back(in.storage());
  }
  if (!any) return;
  out.set_requires_grad(true);
  tape->record(std::move(op), std::move(storages), out.storage(), std::move(backward));
}

/// Throws NumericError naming `op` if finite checks are on and `t` holds NaN/Inf.
template <class T>
void check_finite(const Tensor<T>& t, const char* op);

extern template void check_finite<float>(const Tensor<float>&, const char*);
extern template void check_finite<double>(const Tensor<double>&, const char*);

}  // namespace emojigan
