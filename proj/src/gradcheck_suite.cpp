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

#include "emojigan/gradcheck_suite.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "emojigan/gan.hpp"
#include "emojigan/grad_check.hpp"
#include "emojigan/nn.hpp"
#include "emojigan/ops.hpp"
#include "emojigan/rng.hpp"

namespace emojigan {

namespace {

using D = double;
using TD = Tensor<double>;

constexpr double kStep64 = 1e-6;
constexpr double kTol64 = 1e-6;

TD randn(Rng& rng, Shape shape, double sd = 1.0) {
  TD t(std::move(shape));
  for (auto& v : t.data()) v = rng.normal(0.0, sd);
  return t;
}

/// Normal draws pushed at least `gap` away from zero, for kinked activations.
TD away_from_zero(Rng& rng, Shape shape, double gap) {
  TD t(std::move(shape));
  for (auto& v : t.data()) {
    const double n = rng.normal();
    v = n < 0 ? n - gap : n + gap;
  }
  return t;
}

TD uniform(Rng& rng, Shape shape, double lo, double hi) {
  TD t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

/// Scalarizes a tensor output with fixed random weights so every output
/// element's gradient is exercised.
TD project(const TD& y, const TD& weights) { return sum(mul(y, weights)); }

GradCheckCase unary_case(std::string name, Rng& rng, TD x, std::function<TD(const TD&)> op) {
  TD w = randn(rng, op(x).shape());
  return {std::move(name), "f64", kTol64, [x, w, op] {
            return grad_check<D>([&] { return project(op(x), w); }, {x}, kStep64);
          }};
}

GradCheckCase binary_case(std::string name, Rng& rng, TD a, TD b, std::function<TD(const TD&, const TD&)> op) {
  TD w = randn(rng, op(a, b).shape());
  return {std::move(name), "f64", kTol64, [a, b, w, op] {
            return grad_check<D>([&] { return project(op(a, b), w); }, {a, b}, kStep64);
          }};
}

ArchConfig tiny_arch() {
  ArchConfig arch;
  arch.noise_dim = 4;
  arch.embed_dim = 5;
  arch.embed_proj_dim = 3;
  arch.image_size = 8;
  arch.base_channels = 4;
  return arch;
}

/// generator_loss(D(G(z, t), t)) on the tiny architecture with batchnorm in
/// training mode, differentiated with respect to z, t and every trainable
/// parameter of both nets.
template <class T>
GradCheckCase composite_case(std::uint64_t seed, double step, double tol) {
  const ArchConfig arch = tiny_arch();
  auto g = std::make_shared<GeneratorNet<T>>(arch);
  auto d = std::make_shared<DiscriminatorNet<T>>(arch);
  Rng rng(seed);
  Rng init = rng.substream("composite-init");
  g->init(init);
  d->init(init);
  // Wider than the training init so the composite has non-trivial curvature.
  for (auto& p : g->parameters())
    if (p.trainable && p.name.ends_with("weight"))
      for (auto& v : p.tensor.data()) v = T(init.normal(0.0, 0.3));
  for (auto& p : d->parameters())
    if (p.trainable && p.name.ends_with("weight"))
      for (auto& v : p.tensor.data()) v = T(init.normal(0.0, 0.3));
  const std::size_t n = 3;
  Tensor<T> z({n, arch.noise_dim}), t({n, arch.embed_dim});
  for (auto& v : z.data()) v = T(rng.normal());
  for (auto& v : t.data()) v = T(rng.normal());
  std::vector<Tensor<T>> wrt{z, t};
  for (auto& p : g->parameters())
    if (p.trainable) wrt.push_back(p.tensor);
  for (auto& p : d->parameters())
    if (p.trainable) wrt.push_back(p.tensor);
  const std::string precision = sizeof(T) == 8 ? "f64" : "f32";
  return {"composite_generator_discriminator", precision, tol, [g, d, z, t, wrt, step] {
            return static_cast<double>(grad_check<T>(
                [&] { return generator_loss(d->forward(g->forward(z, t, true), t, true)); }, wrt, T(step)));
          }};
}

}  // namespace

std::vector<GradCheckCase> default_gradcheck_cases(std::uint64_t seed) {
  Rng rng = Rng(seed).substream("gradcheck");
  std::vector<GradCheckCase> cases;

  cases.push_back(binary_case("add", rng, randn(rng, {3, 4}), randn(rng, {4}),
                              [](const TD& a, const TD& b) { return add(a, b); }));
  cases.push_back(binary_case("sub", rng, randn(rng, {2, 1, 3}), randn(rng, {4, 1}),
                              [](const TD& a, const TD& b) { return sub(a, b); }));
  cases.push_back(binary_case("mul", rng, randn(rng, {3, 1}), randn(rng, {2, 3, 4}),
                              [](const TD& a, const TD& b) { return mul(a, b); }));
  cases.push_back(unary_case("scale", rng, randn(rng, {5}), [](const TD& x) { return scale(x, -1.7); }));
  cases.push_back(unary_case("add_scalar", rng, randn(rng, {5}), [](const TD& x) { return add_scalar(x, 0.3); }));
  cases.push_back(binary_case("matmul", rng, randn(rng, {3, 4}), randn(rng, {4, 2}),
                              [](const TD& a, const TD& b) { return matmul(a, b); }));
  cases.push_back(unary_case("relu", rng, away_from_zero(rng, {12}, 0.05), [](const TD& x) { return relu(x); }));
  cases.push_back(unary_case("leaky_relu", rng, away_from_zero(rng, {12}, 0.05),
                             [](const TD& x) { return leaky_relu(x, 0.2); }));
  cases.push_back(unary_case("tanh", rng, randn(rng, {10}), [](const TD& x) { return tanh(x); }));
  cases.push_back(unary_case("sigmoid", rng, randn(rng, {10}, 3.0), [](const TD& x) { return sigmoid(x); }));
  cases.push_back(unary_case("log", rng, uniform(rng, {10}, 0.2, 3.0), [](const TD& x) { return log(x); }));
  {
    // Values well inside or well outside [-0.5, 0.5].
    TD x({10});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-0.4, 0.4) + (i % 3 == 0 ? 1.5 : 0.0);
    cases.push_back(unary_case("clamp", rng, x, [](const TD& v) { return clamp(v, -0.5, 0.5); }));
  }
  cases.push_back(unary_case("sum", rng, randn(rng, {2, 3}), [](const TD& x) { return sum(x); }));
  cases.push_back(unary_case("mean", rng, randn(rng, {2, 3}), [](const TD& x) { return mean(x); }));
  cases.push_back(unary_case("reshape", rng, randn(rng, {2, 6}), [](const TD& x) { return reshape(x, {3, 4}); }));
  cases.push_back(binary_case("concat", rng, randn(rng, {2, 3, 2}), randn(rng, {2, 1, 2}), [](const TD& a, const TD& b) {
    return concat<D>({a, b}, 1);
  }));
  {
    TD x = randn(rng, {2, 3, 1, 1});
    TD w = randn(rng, {2, 3, 4, 4});
    cases.push_back({"broadcast_to", "f64", kTol64, [x, w] {
                       return grad_check<D>([&] { return project(broadcast_to(x, {2, 3, 4, 4}), w); }, {x}, kStep64);
                     }});
  }
  {
    TD x = randn(rng, {2, 3, 6, 6}), k = randn(rng, {4, 3, 4, 4}), b = randn(rng, {4});
    TD w = randn(rng, {2, 4, 3, 3});
    cases.push_back({"conv2d", "f64", kTol64, [x, k, b, w] {
                       return grad_check<D>([&] { return project(conv2d(x, k, b, 2, 1), w); }, {x, k, b}, kStep64);
                     }});
  }
  {
    TD x = randn(rng, {2, 3, 3, 3}), k = randn(rng, {3, 2, 4, 4}), b = randn(rng, {2});
    TD w = randn(rng, {2, 2, 6, 6});
    cases.push_back({"deconv2d", "f64", kTol64, [x, k, b, w] {
                       return grad_check<D>([&] { return project(deconv2d(x, k, b, 2, 1), w); }, {x, k, b}, kStep64);
                     }});
  }
  {
    TD x = randn(rng, {3, 2, 2, 2}), gamma = uniform(rng, {2}, 0.5, 1.5), beta = randn(rng, {2});
    TD w = randn(rng, {3, 2, 2, 2});
    cases.push_back({"batchnorm_train", "f64", kTol64, [x, gamma, beta, w] {
                       TD rm({2}), rv({2}, 1.0);
                       return grad_check<D>(
                           [&] { return project(batchnorm_train(x, gamma, beta, rm, rv, 1e-5, 0.1), w); },
                           {x, gamma, beta}, kStep64);
                     }});
  }
  {
    TD x = randn(rng, {3, 2, 2, 2}), gamma = uniform(rng, {2}, 0.5, 1.5), beta = randn(rng, {2});
    TD rm = randn(rng, {2}), rv = uniform(rng, {2}, 0.5, 2.0);
    TD w = randn(rng, {3, 2, 2, 2});
    cases.push_back({"batchnorm_infer", "f64", kTol64, [x, gamma, beta, rm, rv, w] {
                       return grad_check<D>([&] { return project(batchnorm_infer(x, gamma, beta, rm, rv, 1e-5), w); },
                                            {x, gamma, beta}, kStep64);
                     }});
  }
  {
    TD x = randn(rng, {3, 5}), k = randn(rng, {2, 5}), b = randn(rng, {2});
    TD w = randn(rng, {3, 2});
    cases.push_back({"dense", "f64", kTol64, [x, k, b, w] {
                       return grad_check<D>([&] { return project(dense(x, k, b), w); }, {x, k, b}, kStep64);
                     }});
  }
  {
    TD real = uniform(rng, {4}, 0.05, 0.95), fake = uniform(rng, {4}, 0.05, 0.95);
    cases.push_back({"minimax_value", "f64", kTol64, [real, fake] {
                       return grad_check<D>([&] { return minimax_value(real, fake); }, {real, fake}, kStep64);
                     }});
  }
  {
    TD rt = uniform(rng, {4}, 0.05, 0.95), rf = uniform(rng, {4}, 0.05, 0.95), ft = uniform(rng, {4}, 0.05, 0.95);
    cases.push_back({"discriminator_loss_threepart", "f64", kTol64, [rt, rf, ft] {
                       return grad_check<D>([&] { return discriminator_loss_threepart(rt, rf, ft); }, {rt, rf, ft},
                                            kStep64);
                     }});
  }
  {
    TD s = uniform(rng, {4}, 0.05, 0.95);
    cases.push_back({"generator_loss", "f64", kTol64,
                     [s] { return grad_check<D>([&] { return generator_loss(s); }, {s}, kStep64); }});
    cases.push_back({"generator_loss_literal", "f64", kTol64,
                     [s] { return grad_check<D>([&] { return generator_loss_literal(s); }, {s}, kStep64); }});
  }
  cases.push_back(composite_case<double>(seed, kStep64, kTol64));
  cases.push_back(composite_case<float>(seed, 1e-3, 1e-3));
  return cases;
}

std::vector<GradCheckOutcome> run_gradcheck_cases(const std::vector<GradCheckCase>& cases) {
  std::vector<GradCheckOutcome> out;
  for (const auto& c : cases) {
    const double err = c.run();
    out.push_back({c.name, c.precision, err, c.tolerance, std::isfinite(err) && err < c.tolerance});
  }
  return out;
}

int run_gradcheck_suite(const std::vector<GradCheckCase>& cases, std::ostream& out) {
  const auto outcomes = run_gradcheck_cases(cases);
  char line[160];
  std::snprintf(line, sizeof line, "%-36s %-4s %12s %10s  %s\n", "op", "prec", "max_rel_err", "tolerance", "status");
  out << line;
  bool ok = true;
  for (const auto& o : outcomes) {
    std::snprintf(line, sizeof line, "%-36s %-4s %12.3e %10.1e  %s\n", o.name.c_str(), o.precision.c_str(),
                  o.max_rel_err, o.tolerance, o.pass ? "ok" : "FAIL");
    out << line;
    ok = ok && o.pass;
  }
  for (const auto& o : outcomes)
    if (!o.pass) out << "FAIL " << o.name << " (" << o.precision << "): max rel. err " << o.max_rel_err << " >= "
                     << o.tolerance << '\n';
  return ok ? 0 : 1;
}

}  // namespace emojigan
