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

#include "emojigan/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "emojigan/error.hpp"
#include "emojigan/ops.hpp"

namespace emojigan {

void TrainConfig::validate() const {
  if (!(lr > 0)) throw std::invalid_argument("train config: lr must be positive");
  if (!(beta1 > 0 && beta1 < 1)) throw std::invalid_argument("train config: beta1 must be in (0, 1)");
  if (!(beta2 > 0 && beta2 < 1)) throw std::invalid_argument("train config: beta2 must be in (0, 1)");
  if (!(adam_eps > 0)) throw std::invalid_argument("train config: adam_eps must be positive");
  if (batch_size == 0) throw std::invalid_argument("train config: batch_size must be positive");
  if (eval_every == 0) throw std::invalid_argument("train config: eval_every must be positive");
  if (patience == 0) throw std::invalid_argument("train config: patience must be positive");
  if (!(collapse_factor > 1)) throw std::invalid_argument("train config: collapse_factor must exceed 1");
  if (eval_samples_per_class == 0) throw std::invalid_argument("train config: eval_samples_per_class must be positive");
  if (std::isnan(gen_twice_threshold)) throw std::invalid_argument("train config: gen_twice_threshold is NaN");
  weights.validate();
}

void adam_step(const ParamList<float>& params, AdamState& state, const TrainConfig& config) {
  std::vector<const NamedTensor<float>*> trainable;
  for (const auto& p : params)
    if (p.trainable) trainable.push_back(&p);

  if (state.m.empty()) {
    for (const auto* p : trainable) {
      state.m.emplace_back(p->tensor.numel(), 0.0f);
      state.v.emplace_back(p->tensor.numel(), 0.0f);
    }
  }
  if (state.m.size() != trainable.size()) throw std::logic_error("adam_step: state does not match parameter list");

  for (const auto* p : trainable) {
    if (!p->tensor.has_grad()) continue;
    for (float g : p->tensor.grad())
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + p->name);
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const float b1 = static_cast<float>(config.beta1), b2 = static_cast<float>(config.beta2);
  const float c1 = static_cast<float>(1.0 - std::pow(config.beta1, t));
  const float c2 = static_cast<float>(1.0 - std::pow(config.beta2, t));
  const float lr = static_cast<float>(config.lr), eps = static_cast<float>(config.adam_eps);

  for (std::size_t k = 0; k < trainable.size(); ++k) {
    Tensor<float> w = trainable[k]->tensor;
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != w.numel()) throw std::logic_error("adam_step: moment shape mismatch for " + trainable[k]->name);
    auto data = w.data();
    const bool has = w.has_grad();
    const std::span<const float> grad = has ? std::as_const(w).grad() : std::span<const float>();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const float g = has ? grad[i] : 0.0f;
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      const float mhat = m[i] / c1, vhat = v[i] / c2;
      data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    w.zero_grad();
  }
}

namespace {

void clear_grads(const ParamList<float>& params) {
  for (const auto& p : params) p.tensor.storage()->grad.clear();
}

double generator_update(const Batch& batch, GeneratorNet<float>& g, DiscriminatorNet<float>& d, TrainState& state,
                        const TrainConfig& config, Rng& rng) {
  const std::size_t n = batch.images.dim(0);
  const Tensor<float> z = sample_noise(n, g.config().noise_dim, rng);
  Tape<float> tape;
  Tensor<float> loss;
  {
    TapeScope<float> scope(tape);
    const Tensor<float> fake = g.forward(z, batch.true_embeddings, true);
    const Tensor<float> s = d.forward(fake, batch.true_embeddings, true);
    loss = config.literal_minimax ? generator_loss_literal(s) : generator_loss(s);
  }
  tape.backward(loss);
  clear_grads(d.parameters());
  adam_step(g.parameters(), state.g_adam, config);
  return loss.item();
}

}  // namespace

double discriminator_step(const Batch& batch, GeneratorNet<float>& g, DiscriminatorNet<float>& d, TrainState& state,
                          const TrainConfig& config, Rng& rng, double* real_acc) {
  const std::size_t n = batch.images.dim(0);
  Tensor<float> fake;
  {
    NoGradScope<float> no_grad;
    const Tensor<float> z = sample_noise(n, g.config().noise_dim, rng);
    fake = g.forward(z, batch.true_embeddings, true).detach();
  }
  Tape<float> tape;
  Tensor<float> loss, s_rt;
  {
    TapeScope<float> scope(tape);
    s_rt = d.forward(batch.images, batch.true_embeddings, true);
    Tensor<float> s_rf;
    if (config.weights.real_mismatched > 0) s_rf = d.forward(batch.images, batch.mismatched_embeddings, true);
    const Tensor<float> s_ft = d.forward(fake, batch.true_embeddings, true);
    loss = discriminator_loss_threepart(s_rt, s_rf, s_ft, config.weights);
  }
  tape.backward(loss);
  clear_grads(g.parameters());
  adam_step(d.parameters(), state.d_adam, config);
  if (real_acc != nullptr) {
    std::size_t hits = 0;
    for (float s : s_rt.data()) hits += s > 0.5f;
    *real_acc = static_cast<double>(hits) / static_cast<double>(n);
  }
  return loss.item();
}

StepResult train_step(const Batch& batch, GeneratorNet<float>& g, DiscriminatorNet<float>& d, TrainState& state,
                      const TrainConfig& config, Rng& rng) {
  StepResult r;
  r.d_loss = discriminator_step(batch, g, d, state, config, rng, &r.d_real_acc);
  r.g_loss = generator_update(batch, g, d, state, config, rng);
  ++state.step;
  if (r.d_loss < config.gen_twice_threshold) {
    r.gen_twice = true;
    r.g_loss = generator_update(batch, g, d, state, config, rng);
    state.events.push_back({TrainEvent::Kind::kGeneratorTwice, state.step, state.epoch, ""});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Proxy evaluation

ProxyResult score_samples(const Corpus& corpus, const std::vector<std::vector<Tensor<float>>>& samples) {
  if (corpus.size() == 0) throw std::invalid_argument("score_samples: empty corpus");
  if (samples.size() != corpus.num_classes())
    throw DimensionError("score_samples: expected samples for " + std::to_string(corpus.num_classes()) +
                         " classes, got " + std::to_string(samples.size()));
  ProxyResult r;
  r.correct_per_class.assign(samples.size(), 0);
  std::size_t total = 0, wrong = 0;
  double l1_sum = 0;
  for (std::size_t c = 0; c < samples.size(); ++c) {
    for (const auto& s : samples[c]) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_label = 0;
      for (const auto& real : corpus.samples) {
        if (real.pixels.shape() != s.shape())
          throw DimensionError("score_samples: sample " + shape_str(s.shape()) + " vs corpus " +
                               shape_str(real.pixels.shape()));
        const auto a = s.data();
        const auto b = real.pixels.data();
        double d = 0;
        for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(static_cast<double>(a[i]) - b[i]);
        d /= static_cast<double>(a.size());
        if (d < best) {
          best = d;
          best_label = real.label;
        }
      }
      l1_sum += best;
      ++total;
      if (best_label == c)
        ++r.correct_per_class[c];
      else
        ++wrong;
    }
    if (2 * r.correct_per_class[c] > samples[c].size()) ++r.class_matches;
  }
  if (total == 0) throw std::invalid_argument("score_samples: no samples");
  r.mean_l1 = l1_sum / static_cast<double>(total);
  r.wrong_fraction = static_cast<double>(wrong) / static_cast<double>(total);
  r.score = r.mean_l1 + r.wrong_fraction;
  return r;
}

ProxyResult evaluate_proxy(GeneratorNet<float>& g, const Corpus& corpus, const Tensor<float>& embeddings, Rng& rng,
                           std::size_t per_class) {
  const std::size_t classes = corpus.num_classes(), dim = g.config().embed_dim;
  if (embeddings.rank() != 2 || embeddings.dim(0) != classes || embeddings.dim(1) != dim)
    throw DimensionError("evaluate_proxy: embeddings " + shape_str(embeddings.shape()) + " do not match corpus");
  NoGradScope<float> no_grad;
  std::vector<std::vector<Tensor<float>>> samples(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const Tensor<float> z = sample_noise(per_class, g.config().noise_dim, rng);
    Tensor<float> t({per_class, dim});
    for (std::size_t r = 0; r < per_class; ++r)
      for (std::size_t q = 0; q < dim; ++q) t[r * dim + q] = embeddings[c * dim + q];
    const Tensor<float> images = generate(g, z, t);
    const Shape cell{images.dim(1), images.dim(2), images.dim(3)};
    const std::size_t numel = shape_numel(cell);
    for (std::size_t r = 0; r < per_class; ++r) {
      auto src = images.data().subspan(r * numel, numel);
      samples[c].emplace_back(cell, std::vector<float>(src.begin(), src.end()));
    }
  }
  return score_samples(corpus, samples);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string format_history_csv(const std::vector<HistoryRow>& rows) {
  std::string s = "step,epoch,d_loss,g_loss,d_real_acc,gen_twice,restored\n";
  for (const auto& r : rows) {
    s += std::to_string(r.step) + ',' + std::to_string(r.epoch) + ',' + fmt9(r.d_loss) + ',' + fmt9(r.g_loss) + ',' +
         fmt9(r.d_real_acc) + ',' + (r.gen_twice ? '1' : '0') + ',' + (r.restored ? '1' : '0') + '\n';
  }
  return s;
}

std::string format_evals_csv(const std::vector<EvalRecord>& rows) {
  std::string s = "eval,epoch,step,score,mean_l1,class_matches,best_score,improved,restored\n";
  for (const auto& r : rows) {
    s += std::to_string(r.eval) + ',' + std::to_string(r.epoch) + ',' + std::to_string(r.step) + ',' + fmt9(r.score) +
         ',' + fmt9(r.mean_l1) + ',' + std::to_string(r.class_matches) + ',' + fmt9(r.best_score) + ',' +
         (r.improved ? '1' : '0') + ',' + (r.restored ? '1' : '0') + '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(const Corpus& corpus, Tensor<float> class_embeddings, const ArchConfig& arch,
                 const TrainConfig& config)
    : corpus_(&corpus),
      embeddings_(std::move(class_embeddings)),
      arch_(arch),
      config_(config),
      root_(config.seed),
      g_(arch),
      d_(arch) {
  config_.validate();
  if (corpus.image_size != arch.image_size)
    throw std::invalid_argument("trainer: corpus image size " + std::to_string(corpus.image_size) +
                                " does not match arch image size " + std::to_string(arch.image_size));
  if (embeddings_.rank() != 2 || embeddings_.dim(0) != corpus.num_classes() || embeddings_.dim(1) != arch.embed_dim)
    throw DimensionError("trainer: class embeddings " + shape_str(embeddings_.shape()) + " do not match " +
                         std::to_string(corpus.num_classes()) + " classes of dim " + std::to_string(arch.embed_dim));
  Rng init = root_.substream("init");
  g_.init(init);
  d_.init(init);
}

ModelSnapshot Trainer::snapshot() const {
  ParamList<float> all = g_.parameters();
  for (auto& p : d_.parameters()) all.push_back(p);
  return {to_param_file(all), state_.g_adam, state_.d_adam};
}

void Trainer::restore(const ModelSnapshot& snap) {
  ParamList<float> g = g_.parameters(), d = d_.parameters();
  assign_params(snap.params, g);
  assign_params(snap.params, d);
  clear_grads(g);
  clear_grads(d);
  state_.g_adam = snap.g_adam;
  state_.d_adam = snap.d_adam;
}

ParamFile Trainer::checkpoint(const nlohmann::json& extra) const {
  return make_checkpoint(g_, d_, corpus_->class_words, embeddings_, extra);
}

TrainResult Trainer::run(const std::filesystem::path& out_dir, const TrainHooks& hooks) {
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  Rng noise = root_.substream("noise");
  BatchSampler sampler(*corpus_, embeddings_, config_.batch_size, root_.substream("shuffle"));

  TrainResult result;
  ParamFile best_file;
  bool stop = false;
  while (!stop && state_.epoch < config_.max_epochs) {
    ++state_.epoch;
    for (const Batch& batch : sampler.epoch()) {
      const StepResult r = train_step(batch, g_, d_, state_, config_, noise);
      result.history.push_back({state_.step, state_.epoch, r.d_loss, r.g_loss, r.d_real_acc, r.gen_twice, false});
      if (config_.max_steps != 0 && state_.step >= config_.max_steps) {
        stop = true;
        break;
      }
    }
    if (state_.epoch % config_.eval_every != 0) continue;

    EvalRecord rec;
    rec.eval = ++state_.evals;
    rec.epoch = state_.epoch;
    rec.step = state_.step;
    std::optional<ProxyResult> proxy;
    if (hooks.score_override) {
      rec.score = hooks.score_override(rec.eval, g_);
    } else {
      Rng eval_rng = root_.substream("eval");
      proxy = evaluate_proxy(g_, *corpus_, embeddings_, eval_rng, config_.eval_samples_per_class);
      rec.score = proxy->score;
      rec.mean_l1 = proxy->mean_l1;
      rec.class_matches = proxy->class_matches;
    }
    if (rec.score < state_.best_score) {
      rec.improved = true;
      state_.best_score = rec.score;
      state_.best_epoch = state_.epoch;
      state_.evals_since_improvement = 0;
      state_.best = snapshot();
      result.best_proxy = proxy;
      best_file = checkpoint({{"epoch", state_.epoch}, {"step", state_.step}, {"score", rec.score}});
    } else {
      ++state_.evals_since_improvement;
      if (state_.best && rec.score > config_.collapse_factor * state_.best_score) {
        restore(*state_.best);
        rec.restored = true;
        if (!result.history.empty()) result.history.back().restored = true;
        state_.events.push_back({TrainEvent::Kind::kRestore, state_.step, state_.epoch,
                                 "score " + fmt9(rec.score) + " > " + fmt9(config_.collapse_factor) + " x best " +
                                     fmt9(state_.best_score)});
      }
    }
    rec.best_score = state_.best_score;
    result.evals.push_back(rec);
    if (hooks.on_eval) hooks.on_eval(rec, g_, d_, state_);
    if (state_.evals_since_improvement >= config_.patience) {
      state_.events.push_back({TrainEvent::Kind::kEarlyStop, state_.step, state_.epoch,
                               std::to_string(state_.evals_since_improvement) + " evals without improvement"});
      result.early_stopped = true;
      stop = true;
    }
  }

  result.best_score = state_.best_score;
  result.steps = state_.step;
  result.epochs = state_.epoch;
  result.events = state_.events;
  result.final_checkpoint = checkpoint({{"epoch", state_.epoch}, {"step", state_.step}});
  result.best_checkpoint = state_.best ? best_file : result.final_checkpoint;

  if (!out_dir.empty()) {
    write_text(out_dir / "history.csv", format_history_csv(result.history));
    write_text(out_dir / "evals.csv", format_evals_csv(result.evals));
    save_param_file(out_dir / "best.ckpt", result.best_checkpoint);
    save_param_file(out_dir / "final.ckpt", result.final_checkpoint);
  }
  return result;
}

}  // namespace emojigan
