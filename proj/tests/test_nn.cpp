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
#include <vector>

#include "emojigan/error.hpp"
#include "emojigan/grad_check.hpp"
#include "emojigan/nn.hpp"
#include "emojigan/ops.hpp"
#include "emojigan/rng.hpp"

namespace emojigan {
namespace {

using TD = Tensor<double>;

template <class T = double>
Tensor<T> random_tensor(Rng& rng, Shape shape) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(rng.normal());
  return t;
}

// Direct seven-loop cross-correlation.
TD naive_conv(const TD& x, const TD& w, std::size_t stride, std::size_t pad) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t o = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  TD y({n, o, oh, ow});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t q = 0; q < o; ++q)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double s = 0;
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t u = 0; u < k; ++u)
              for (std::size_t v = 0; v < k; ++v) {
                const long yy = static_cast<long>(i * stride + u) - static_cast<long>(pad);
                const long xx = static_cast<long>(j * stride + v) - static_cast<long>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(wd)) continue;
                s += x[((b * c + ch) * h + yy) * wd + xx] * w[((q * c + ch) * k + u) * k + v];
              }
          y[((b * o + q) * oh + i) * ow + j] = s;
        }
  return y;
}

// Scatter form of the transposed convolution: every input pixel stamps the
// kernel onto the output.
TD naive_deconv(const TD& x, const TD& w, std::size_t stride, std::size_t pad) {
  const std::size_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t co = w.dim(1), k = w.dim(2);
  const std::size_t oh = (h - 1) * stride + k - 2 * pad, ow = (wd - 1) * stride + k - 2 * pad;
  TD y({n, co, oh, ow});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t p = 0; p < ci; ++p)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < wd; ++j)
          for (std::size_t q = 0; q < co; ++q)
            for (std::size_t u = 0; u < k; ++u)
              for (std::size_t v = 0; v < k; ++v) {
                const long yy = static_cast<long>(i * stride + u) - static_cast<long>(pad);
                const long xx = static_cast<long>(j * stride + v) - static_cast<long>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(oh) || xx >= static_cast<long>(ow)) continue;
                y[((b * co + q) * oh + yy) * ow + xx] +=
                    x[((b * ci + p) * h + i) * wd + j] * w[((p * co + q) * k + u) * k + v];
              }
  return y;
}

double dot(const TD& a, const TD& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
  return s;
}

TEST(Conv2d, HandComputedCrossCorrelation) {
  TD x({1, 1, 3, 3}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  TD w({1, 1, 2, 2}, std::vector<double>{1, 0, 0, 1});
  const TD y = conv2d(x, w, TD(), 1, 0);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{6, 8, 12, 14}));
}

TEST(Conv2d, IdentityKernelAndBias) {
  Rng rng(1);
  TD x = random_tensor(rng, {2, 3, 4, 4});
  TD w({3, 3, 1, 1});
  for (std::size_t c = 0; c < 3; ++c) w[c * 3 + c] = 1;
  TD b({3}, std::vector<double>{0, 0, 0});
  const TD y = conv2d(x, w, b, 1, 0);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y[i], x[i]);
  TD b2({3}, std::vector<double>{1, 2, 3});
  const TD y2 = conv2d(x, w, b2, 1, 0);
  EXPECT_DOUBLE_EQ(y2[16 * 2 + 5], x[16 * 2 + 5] + 3);
}

TEST(Conv2d, MatchesNaiveLoopsOverManyShapes) {
  Rng rng(2);
  for (std::size_t k = 1; k <= 4; ++k)
    for (std::size_t s = 1; s <= 3; ++s)
      for (std::size_t p = 0; p <= 2 && p < k; ++p) {
        const std::size_t size = 7;
        TD x = random_tensor(rng, {2, 3, size, size}), w = random_tensor(rng, {2, 3, k, k});
        const TD y = conv2d(x, w, TD(), s, p), ref = naive_conv(x, w, s, p);
        ASSERT_EQ(y.shape(), ref.shape());
        for (std::size_t i = 0; i < y.numel(); ++i) ASSERT_NEAR(y[i], ref[i], 1e-12) << k << s << p;
      }
}

TEST(Conv2d, Errors) {
  TD x({1, 2, 4, 4}), w({1, 3, 2, 2});
  EXPECT_THROW(conv2d(x, w, TD(), 1, 0), DimensionError);
  TD w2({1, 2, 5, 5});
  EXPECT_THROW(conv2d(x, w2, TD(), 1, 0), DimensionError);
  EXPECT_THROW(conv_out_size(4, 5, 1, 0), DimensionError);
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  Rng rng(3);
  TD x = random_tensor(rng, {1, 2, 8, 8}), w = random_tensor(rng, {2, 2, 3, 3}), b = random_tensor(rng, {2});
  TD r = random_tensor(rng, {1, 2, 6, 6});
  const double err = grad_check<double>([&] { return sum(mul(conv2d(x, w, b, 1, 0), r)); }, {x, w, b}, 1e-3);
  EXPECT_LT(err, 1e-4);
}

TEST(Deconv2d, DoublesSpatialSize) {
  TD x({1, 2, 4, 4}, 1.0), w({2, 3, 4, 4}, 0.5);
  const TD y = deconv2d(x, w, TD(), 2, 1);
  EXPECT_EQ(y.shape(), (Shape{1, 3, 8, 8}));
  EXPECT_EQ(deconv_out_size(4, 4, 2, 1), 8u);
}

TEST(Deconv2d, UnitKernelScales) {
  Rng rng(4);
  TD x = random_tensor(rng, {2, 1, 5, 5});
  TD w({1, 1, 1, 1}, 2.5);
  const TD y = deconv2d(x, w, TD(), 1, 0);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_DOUBLE_EQ(y[i], 2.5 * x[i]);
}

TEST(Deconv2d, MatchesScatterDefinition) {
  Rng rng(5);
  for (std::size_t k = 1; k <= 4; ++k)
    for (std::size_t s = 1; s <= 3; ++s)
      for (std::size_t p = 0; p <= 2 && 2 * p < k + 4 * s; ++p) {
        if ((5 - 1) * s + k <= 2 * p) continue;
        TD x = random_tensor(rng, {2, 3, 5, 5}), w = random_tensor(rng, {3, 2, k, k});
        const TD y = deconv2d(x, w, TD(), s, p), ref = naive_deconv(x, w, s, p);
        ASSERT_EQ(y.shape(), ref.shape());
        for (std::size_t i = 0; i < y.numel(); ++i) ASSERT_NEAR(y[i], ref[i], 1e-12);
      }
}

TEST(Deconv2d, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  TD x = random_tensor(rng, {1, 2, 3, 3}), w = random_tensor(rng, {2, 2, 4, 4}), b = random_tensor(rng, {2});
  TD r = random_tensor(rng, {1, 2, 6, 6});
  const double err = grad_check<double>([&] { return sum(mul(deconv2d(x, w, b, 2, 1), r)); }, {x, w, b}, 1e-3);
  EXPECT_LT(err, 1e-4);
}

// <conv(x), y> == <x, deconv(y)> with one shared weight tensor.
TEST(Adjoint, HoldsOnRandomShapes64) {
  Rng rng(7);
  int checked = 0;
  while (checked < 50) {
    const std::size_t k = 1 + rng.uniform_index(4), s = 1 + rng.uniform_index(3);
    const std::size_t p = rng.uniform_index(std::min<std::size_t>(k, 3));
    // Pick the conv output size first so the input has no unread border.
    const long oh = 1 + static_cast<long>(rng.uniform_index(4));
    const long h = (oh - 1) * static_cast<long>(s) + static_cast<long>(k) - 2 * static_cast<long>(p);
    if (h < 1) continue;
    const std::size_t c = 1 + rng.uniform_index(3), o = 1 + rng.uniform_index(3), n = 1 + rng.uniform_index(2);
    const auto hs = static_cast<std::size_t>(h);
    TD x = random_tensor(rng, {n, c, hs, hs}), w = random_tensor(rng, {o, c, k, k});
    const TD cx = conv2d(x, w, TD(), s, p);
    TD y = random_tensor(rng, cx.shape());
    // Reading the [o, c, k, k] conv weight as deconv's [in=o, out=c, k, k].
    const TD dy = deconv2d(y, w, TD(), s, p);
    ASSERT_EQ(dy.shape(), x.shape());
    EXPECT_NEAR(dot(cx, y), dot(x, dy), 1e-8 * (1 + std::abs(dot(cx, y)))) << "k" << k << " s" << s << " p" << p;
    ++checked;
  }
}

TEST(Adjoint, HoldsOnFiveByFiveIn32Bit) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<float> x = random_tensor<float>(rng, {1, 2, 5, 5}), w = random_tensor<float>(rng, {3, 2, 3, 3});
    const Tensor<float> cx = conv2d(x, w, Tensor<float>(), 1, 1);
    Tensor<float> y = random_tensor<float>(rng, cx.shape());
    const Tensor<float> dy = deconv2d(y, w, Tensor<float>(), 1, 1);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < cx.numel(); ++i) a += double(cx[i]) * y[i];
    for (std::size_t i = 0; i < x.numel(); ++i) b += double(x[i]) * dy[i];
    EXPECT_NEAR(a, b, 1e-4 * (1 + std::abs(a)));
  }
}

// Output sizes for every valid (k, s, p) with k <= 5, s <= 3, p <= 2 and
// inputs up to 16, checked against the naive implementations' shapes.
TEST(Shapes, ExhaustiveSweep) {
  for (std::size_t k = 1; k <= 5; ++k)
    for (std::size_t s = 1; s <= 3; ++s)
      for (std::size_t p = 0; p <= 2; ++p)
        for (std::size_t in = 1; in <= 16; ++in) {
          const long conv = (static_cast<long>(in) + 2 * static_cast<long>(p) - static_cast<long>(k)) /
                                static_cast<long>(s) + 1;
          const bool conv_valid = static_cast<long>(in + 2 * p) >= static_cast<long>(k);
          if (conv_valid) {
            EXPECT_EQ(conv_out_size(in, k, s, p), static_cast<std::size_t>(conv));
          } else {
            EXPECT_THROW(conv_out_size(in, k, s, p), DimensionError);
          }
          const long deconv = (static_cast<long>(in) - 1) * static_cast<long>(s) - 2 * static_cast<long>(p) +
                              static_cast<long>(k);
          if (deconv >= 1) {
            EXPECT_EQ(deconv_out_size(in, k, s, p), static_cast<std::size_t>(deconv));
          } else {
            EXPECT_THROW(deconv_out_size(in, k, s, p), DimensionError);
          }
        }
  // Spot-check the actual ops on a subset.
  Rng rng(9);
  for (std::size_t k = 1; k <= 5; ++k)
    for (std::size_t s = 1; s <= 3; ++s)
      for (std::size_t p = 0; p <= 2; ++p)
        for (std::size_t in : {1u, 5u, 16u}) {
          TD x = random_tensor(rng, {1, 1, in, in}), w = random_tensor(rng, {1, 1, k, k});
          if (in + 2 * p >= k) {
            EXPECT_EQ(conv2d(x, w, TD(), s, p).dim(2), conv_out_size(in, k, s, p));
          }
          if (static_cast<long>((in - 1) * s + k) - 2 * static_cast<long>(p) >= 1) {
            EXPECT_EQ(deconv2d(x, w, TD(), s, p).dim(2), deconv_out_size(in, k, s, p));
          }
        }
}

TEST(BatchNorm, ConstantInputGivesZeros) {
  TD x({4, 2, 3, 3}, 7.0), gamma({2}, 1.0), beta({2}, 0.0), rm({2}), rv({2}, 1.0);
  const TD y = batchnorm_train(x, gamma, beta, rm, rv, 1e-5, 0.1);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(BatchNorm, NormalizesPerChannel) {
  Rng rng(10);
  TD x = random_tensor(rng, {5, 3, 4, 4});
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = 3 * x[i] + 2 + static_cast<double>((i / 16) % 3);
  TD gamma({3}, 1.0), beta({3}, 0.0), rm({3}), rv({3}, 1.0);
  const TD y = batchnorm_train(x, gamma, beta, rm, rv, 1e-5, 0.1);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0, sq = 0;
    std::size_t cnt = 0;
    for (std::size_t b = 0; b < 5; ++b)
      for (std::size_t i = 0; i < 16; ++i) {
        const double v = y[(b * 3 + c) * 16 + i];
        s += v;
        sq += v * v;
        ++cnt;
      }
    const double mean = s / cnt, var = sq / cnt - mean * mean;
    EXPECT_LT(std::abs(mean), 1e-5);
    EXPECT_LT(std::abs(var - 1), 1e-3);
  }
}

TEST(BatchNorm, AffineTransform) {
  Rng rng(11);
  TD x = random_tensor(rng, {8, 1, 4, 4});
  TD gamma({1}, 2.0), beta({1}, 3.0), rm({1}), rv({1}, 1.0);
  const TD y = batchnorm_train(x, gamma, beta, rm, rv, 1e-5, 0.1);
  double s = 0, sq = 0;
  for (double v : y.data()) {
    s += v;
    sq += v * v;
  }
  const double mean = s / y.numel(), sd = std::sqrt(sq / y.numel() - mean * mean);
  EXPECT_NEAR(mean, 3.0, 1e-3);
  EXPECT_NEAR(sd, 2.0, 1e-3);
}

TEST(BatchNorm, RunningStatisticsUpdate) {
  TD x({2, 1, 1, 2}, std::vector<double>{1, 2, 3, 6});  // mean 3, biased var 3.5, unbiased 14/3
  TD gamma({1}, 1.0), beta({1}, 0.0), rm({1}, 0.0), rv({1}, 1.0);
  batchnorm_train(x, gamma, beta, rm, rv, 1e-5, 0.1);
  EXPECT_NEAR(rm[0], 0.1 * 3.0, 1e-12);
  EXPECT_NEAR(rv[0], 0.9 + 0.1 * 14.0 / 3.0, 1e-12);
  EXPECT_GE(rv[0], 0.0);
}

TEST(BatchNorm, InferenceUsesRunningStatsAndIsPure) {
  TD x({2, 1, 1, 2}, std::vector<double>{1, 2, 3, 6});
  TD gamma({1}, 2.0), beta({1}, 1.0), rm({1}, 2.0), rv({1}, 4.0);
  const TD a = batchnorm_infer(x, gamma, beta, rm, rv, 1e-5);
  const TD b = batchnorm_infer(x, gamma, beta, rm, rv, 1e-5);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(a[i], b[i]);
    EXPECT_NEAR(a[i], 2.0 * (x[i] - 2.0) / std::sqrt(4.0 + 1e-5) + 1.0, 1e-12);
  }
  EXPECT_EQ(rm[0], 2.0);
  EXPECT_EQ(rv[0], 4.0);
}

TEST(BatchNorm, SingleValuePerChannelRejectedInTraining) {
  TD x({1, 2, 1, 1}, 1.0), gamma({2}, 1.0), beta({2}), rm({2}), rv({2}, 1.0);
  EXPECT_THROW(batchnorm_train(x, gamma, beta, rm, rv, 1e-5, 0.1), DimensionError);
  EXPECT_NO_THROW(batchnorm_infer(x, gamma, beta, rm, rv, 1e-5));
}

TEST(Dense, Examples) {
  TD x({1, 2}, std::vector<double>{2, 3}), w({1, 2}, std::vector<double>{1, 1}), b({1}, 1.0);
  const TD y = dense(x, w, b);
  EXPECT_EQ(y.shape(), (Shape{1, 1}));
  EXPECT_EQ(y[0], 6.0);
  TD eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  const TD z = dense(x, eye, TD({2}));
  EXPECT_EQ(z[0], 2.0);
  EXPECT_EQ(z[1], 3.0);
  EXPECT_THROW(dense(x, TD({1, 3}), b), DimensionError);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  Rng rng(12);
  TD x = random_tensor(rng, {3, 4}), w = random_tensor(rng, {2, 4}), b = random_tensor(rng, {2});
  const double err = grad_check<double>([&] { return sum(tanh(dense(x, w, b))); }, {x, w, b}, 1e-3);
  EXPECT_LT(err, 1e-4);
}

TEST(Init, NormalWeightsZeroBiases) {
  Rng rng(13);
  Dense<float> layer(100, 100);
  init_params(layer, rng);
  double s = 0, sq = 0;
  for (float v : layer.weight.data()) {
    s += v;
    sq += double(v) * v;
  }
  const double n = layer.weight.numel(), mean = s / n;
  EXPECT_GT(mean, -0.002);
  EXPECT_LT(mean, 0.002);
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), kInitStddev, 0.002);
  for (float v : layer.bias.data()) EXPECT_EQ(v, 0.0f);

  BatchNorm<float> bn(4);
  init_params(bn, rng);
  for (float v : bn.gamma.data()) EXPECT_EQ(v, 1.0f);
  for (float v : bn.beta.data()) EXPECT_EQ(v, 0.0f);
  for (float v : bn.running_var.data()) EXPECT_EQ(v, 1.0f);
}

TEST(Init, SameSeedSameParameters) {
  Conv2d<float> a(3, 4, 4, 2, 1), b(3, 4, 4, 2, 1);
  Rng ra(99), rb(99);
  init_params(a, ra);
  init_params(b, rb);
  for (std::size_t i = 0; i < a.weight.numel(); ++i) EXPECT_EQ(a.weight[i], b.weight[i]);
}

TEST(Layers, CollectNamesAndTrainability) {
  BatchNorm<float> bn(2);
  ParamList<float> list;
  bn.collect("x.bn", list);
  ASSERT_EQ(list.size(), 4u);
  EXPECT_EQ(list[0].name, "x.bn.gamma");
  EXPECT_TRUE(list[0].trainable);
  EXPECT_EQ(list[3].name, "x.bn.running_var");
  EXPECT_FALSE(list[3].trainable);
}

}  // namespace
}  // namespace emojigan
