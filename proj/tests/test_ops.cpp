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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "emojigan/error.hpp"
#include "emojigan/grad_check.hpp"
#include "emojigan/ops.hpp"
#include "emojigan/rng.hpp"

namespace emojigan {
namespace {

using TD = Tensor<double>;

TD random_tensor(Rng& rng, Shape shape, double gap = 0.0) {
  TD t(std::move(shape));
  for (auto& v : t.data()) {
    const double n = rng.normal();
    v = n < 0 ? n - gap : n + gap;
  }
  return t;
}

std::vector<double> values(const TD& t) { return {t.data().begin(), t.data().end()}; }

/// d sum(f(x)) / dx via the tape.
std::vector<double> tape_grad(const std::function<TD(const TD&)>& f, TD x) {
  x.zero_grad();
  x.set_requires_grad(true);
  Tape<double> tape;
  TD loss;
  {
    TapeScope<double> scope(tape);
    loss = sum(f(x));
  }
  tape.backward(loss);
  std::vector<double> g(x.grad().begin(), x.grad().end());
  x.zero_grad();
  x.set_requires_grad(false);
  return g;
}

TEST(Ops, ElementwiseArithmetic) {
  TD a({2}, std::vector<double>{1, 2}), b({2}, std::vector<double>{3, 4});
  EXPECT_EQ(values(a + b), (std::vector<double>{4, 6}));
  EXPECT_EQ(values(b - a), (std::vector<double>{2, 2}));
  EXPECT_EQ(values(a * b), (std::vector<double>{3, 8}));
  EXPECT_EQ(values(scale(a, 3.0)), (std::vector<double>{3, 6}));
  EXPECT_EQ(values(add_scalar(a, -1.0)), (std::vector<double>{0, 1}));
}

TEST(Ops, BroadcastShapeRules) {
  EXPECT_EQ(broadcast_shape({2, 1}, {1, 3}), (Shape{2, 3}));
  EXPECT_EQ(broadcast_shape({4}, {3, 4}), (Shape{3, 4}));
  EXPECT_EQ(broadcast_shape({}, {2, 2}), (Shape{2, 2}));
  try {
    broadcast_shape({2, 3}, {4, 3});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2,3]"), std::string::npos);
    EXPECT_NE(msg.find("[4,3]"), std::string::npos);
  }
  EXPECT_THROW(add(TD({2, 3}), TD({3, 2})), DimensionError);
}

// Outer-product broadcast: values against explicit loops, gradients of
// sum(W * (a b)) against the hand-derived sums and central differences.
TEST(Ops, BroadcastMulValuesAndGradients) {
  TD a({2, 1}, std::vector<double>{2, -1});
  TD b({1, 3}, std::vector<double>{1, 3, 5});
  TD w({2, 3}, std::vector<double>{0.5, -1, 2, 1.5, 0.25, -3});
  const TD c = mul(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 3}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(c[i * 3 + j], a[i] * b[j]);

  a.set_requires_grad(true);
  b.set_requires_grad(true);
  Tape<double> tape;
  TD loss;
  {
    TapeScope<double> scope(tape);
    loss = sum(mul(w, mul(a, b)));
  }
  tape.backward(loss);
  for (std::size_t i = 0; i < 2; ++i) {
    double expect = 0;
    for (std::size_t j = 0; j < 3; ++j) expect += w[i * 3 + j] * b[j];
    EXPECT_DOUBLE_EQ(a.grad()[i], expect);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    double expect = 0;
    for (std::size_t i = 0; i < 2; ++i) expect += w[i * 3 + j] * a[i];
    EXPECT_DOUBLE_EQ(b.grad()[j], expect);
  }
  a.zero_grad();
  b.zero_grad();
  const double err = grad_check<double>([&] { return sum(mul(w, mul(a, b))); }, {a, b}, 1e-3);
  EXPECT_LT(err, 1e-4);
}

TEST(Ops, MatmulExamples) {
  TD eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  TD m({2, 2}, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(values(matmul(eye, m)), values(m));
  TD row({1, 2}, std::vector<double>{1, 2}), col({2, 1}, std::vector<double>{3, 4});
  const TD dot = matmul(row, col);
  EXPECT_EQ(dot.shape(), (Shape{1, 1}));
  EXPECT_EQ(dot[0], 11.0);
  EXPECT_THROW(matmul(TD({2, 3}), TD({2, 3})), DimensionError);
}

TEST(Ops, MatmulGradientsMatchTransposeFormulas) {
  Rng rng(4);
  TD a = random_tensor(rng, {3, 4}), b = random_tensor(rng, {4, 2});
  const double err = grad_check<double>([&] { return sum(tanh(matmul(a, b))); }, {a, b}, 1e-6);
  EXPECT_LT(err, 1e-4);
  // dA = dC B^T with dC = ones.
  const auto ga = tape_grad([&](const TD& x) { return matmul(x, b); }, a);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(ga[i * 4 + k], b[k * 2] + b[k * 2 + 1], 1e-12);
}

TEST(Ops, ActivationValues) {
  TD zero({1}, 0.0);
  EXPECT_EQ(sigmoid(zero)[0], 0.5);
  EXPECT_EQ(tanh(zero)[0], 0.0);
  EXPECT_DOUBLE_EQ(tape_grad([](const TD& x) { return tanh(x); }, zero)[0], 1.0);
  TD neg({1}, -2.0);
  EXPECT_DOUBLE_EQ(leaky_relu(neg, 0.2)[0], -0.4);
  EXPECT_EQ(relu(neg)[0], 0.0);
  TD big({2}, std::vector<double>{800, -800});
  const TD s = sigmoid(big);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[1], 0.0);
}

TEST(Ops, SubgradientsAtZero) {
  TD zero({1}, 0.0);
  EXPECT_EQ(tape_grad([](const TD& x) { return relu(x); }, zero)[0], 0.0);
  EXPECT_EQ(tape_grad([](const TD& x) { return leaky_relu(x, 0.2); }, zero)[0], 0.2);
}

TEST(Ops, ClampPassesGradientOnlyInside) {
  TD x({3}, std::vector<double>{-2, 0.1, 2});
  EXPECT_EQ(values(clamp(x, -1.0, 1.0)), (std::vector<double>{-1, 0.1, 1}));
  EXPECT_EQ(tape_grad([](const TD& v) { return clamp(v, -1.0, 1.0); }, x), (std::vector<double>{0, 1, 0}));
}

TEST(Ops, Reductions) {
  TD x({2, 2}, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(sum(x).item(), 10.0);
  EXPECT_EQ(mean(x).item(), 2.5);
  EXPECT_EQ(sum(x).rank(), 0u);
  EXPECT_EQ(tape_grad([](const TD& v) { return mean(v); }, x), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
}

TEST(Ops, ReshapeConcatBroadcastTo) {
  TD x({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const TD r = reshape(x, {3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_EQ(values(r), values(x));
  EXPECT_THROW(reshape(x, {4, 2}), DimensionError);

  TD y({2, 1}, std::vector<double>{7, 8});
  const TD c = concat<double>({x, y}, 1);
  EXPECT_EQ(c.shape(), (Shape{2, 4}));
  EXPECT_EQ(values(c), (std::vector<double>{1, 2, 3, 7, 4, 5, 6, 8}));
  EXPECT_THROW(concat<double>({x, TD({3, 1})}, 1), DimensionError);

  const TD b = broadcast_to(y, {2, 3});
  EXPECT_EQ(values(b), (std::vector<double>{7, 7, 7, 8, 8, 8}));
  EXPECT_EQ(tape_grad([](const TD& v) { return broadcast_to(v, {2, 3}); }, y), (std::vector<double>{3, 3}));
}

TEST(Ops, LogRejectsNothingButProducesNonFinite) {
  const bool before = finite_checks_enabled();
  set_finite_checks(true);
  EXPECT_THROW(log(TD({1}, 0.0)), NumericError);
  set_finite_checks(before);
}

// Every op on random tensors of at most 64 elements, 64-bit, rel. err < 1e-6.
TEST(Ops, RandomizedGradientProperty) {
  Rng rng(2024);
  using Op = std::function<TD(const TD&)>;
  const std::vector<std::pair<std::string, Op>> unary = {
      {"tanh", [](const TD& x) { return tanh(x); }},
      {"sigmoid", [](const TD& x) { return sigmoid(x); }},
      {"relu", [](const TD& x) { return relu(x); }},
      {"leaky_relu", [](const TD& x) { return leaky_relu(x, 0.2); }},
      {"scale", [](const TD& x) { return scale(x, 1.3); }},
      {"add_scalar", [](const TD& x) { return add_scalar(x, 0.7); }},
      {"mean", [](const TD& x) { return mean(x); }},
      {"log_of_square", [](const TD& x) { return log(add_scalar(mul(x, x), 0.5)); }},
  };
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t rows = 1 + rng.uniform_index(8), cols = 1 + rng.uniform_index(8);
    for (const auto& [name, op] : unary) {
      TD x = random_tensor(rng, {rows, cols}, 0.01);
      TD w = random_tensor(rng, op(x).shape());
      const double err = grad_check<double>([&] { return sum(mul(op(x), w)); }, {x}, 1e-6);
      EXPECT_LT(err, 1e-6) << name << " trial " << trial;
    }
    TD a = random_tensor(rng, {rows, cols}), b = random_tensor(rng, {1, cols}), w = random_tensor(rng, {rows, cols});
    EXPECT_LT(grad_check<double>([&] { return sum(mul(add(a, b), w)); }, {a, b}, 1e-6), 1e-6);
    EXPECT_LT(grad_check<double>([&] { return sum(mul(sub(a, b), w)); }, {a, b}, 1e-6), 1e-6);
    EXPECT_LT(grad_check<double>([&] { return sum(mul(mul(a, b), w)); }, {a, b}, 1e-6), 1e-6);
    TD m = random_tensor(rng, {cols, 3});
    EXPECT_LT(grad_check<double>([&] { return sum(tanh(matmul(a, m))); }, {a, m}, 1e-6), 1e-6);
  }
}

TEST(Ops, FloatAndDoubleAgree) {
  Tensor<float> xf({3}, std::vector<float>{0.1f, -0.4f, 2.0f});
  TD xd({3}, std::vector<double>{0.1f, -0.4f, 2.0f});
  const auto yf = sigmoid(tanh(xf));
  const auto yd = sigmoid(tanh(xd));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(yf[i], yd[i], 1e-6);
}

}  // namespace
}  // namespace emojigan
