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

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "emojigan/dataset.hpp"
#include "emojigan/gan.hpp"
#include "emojigan/params.hpp"
#include "emojigan/rng.hpp"

namespace emojigan {

struct TrainConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 1000;
  std::size_t max_steps = 0;  // 0: no step limit
  std::uint64_t seed = 0;
  /// A second generator step runs whenever the discriminator loss of the
  /// step falls below this.
  double gen_twice_threshold = 0.3;
  std::size_t eval_every = 50;  // epochs
  std::size_t patience = 10;    // evals without improvement
  double collapse_factor = 2.0;
  LossWeights weights;
  /// Use the saturating generator objective instead of the non-saturating one.
  bool literal_minimax = false;
  std::size_t eval_samples_per_class = 8;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// First and second moments per trainable parameter, in ParamList order.
struct AdamState {
  std::vector<std::vector<float>> m, v;
  std::size_t step = 0;

  bool operator==(const AdamState&) const = default;
};

/// One Adam update with bias correction over the trainable entries of
/// `params`, reading their gradients (a missing gradient counts as zero),
/// then clearing them. Throws NumericError naming the first parameter with
/// a non-finite gradient, before anything is modified.
void adam_step(const ParamList<float>& params, AdamState& state, const TrainConfig& config);

struct TrainEvent {
  enum class Kind { kGeneratorTwice, kRestore, kEarlyStop };
  Kind kind;
  std::size_t step = 0;
  std::size_t epoch = 0;
  std::string detail;
};

struct ModelSnapshot {
  ParamFile params;  // generator and discriminator tensors incl. batchnorm buffers
  AdamState g_adam, d_adam;
};

struct TrainState {
  AdamState g_adam, d_adam;
  std::size_t step = 0;
  std::size_t epoch = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::optional<ModelSnapshot> best;
  std::size_t evals = 0;
  std::size_t evals_since_improvement = 0;
  std::vector<TrainEvent> events;
};

struct StepResult {
  double d_loss = 0;
  double g_loss = 0;      // loss of the last generator update
  double d_real_acc = 0;  // fraction of (real, true label) scored > 0.5
  bool gen_twice = false;
};

/// One discriminator update on the three (image, label) pairings followed
/// by one generator update, plus a second generator update when the
/// discriminator loss is below config.gen_twice_threshold. Noise comes from
/// `rng`. The generator's fakes are detached for the discriminator update,
/// and discriminator gradients from the generator update are discarded, so
/// each update only moves its own network.
StepResult train_step(const Batch& batch, GeneratorNet<float>& g, DiscriminatorNet<float>& d, TrainState& state,
                      const TrainConfig& config, Rng& rng);

/// The discriminator half of train_step alone; returns its loss.
double discriminator_step(const Batch& batch, GeneratorNet<float>& g, DiscriminatorNet<float>& d, TrainState& state,
                          const TrainConfig& config, Rng& rng, double* real_acc = nullptr);

struct ProxyResult {
  double score = 0;           // mean_l1 + wrong_fraction
  double mean_l1 = 0;         // mean per-pixel |a - b| to the nearest real image
  double wrong_fraction = 0;  // samples whose nearest real image has another class
  std::size_t class_matches = 0;              // classes where most samples land on their own class
  std::vector<std::size_t> correct_per_class;
};

/// Scores generated images: samples[c] are images produced for class c.
/// Each sample's nearest real image (mean per-pixel L1, first on ties)
/// gives its distance and whether its class is right.
ProxyResult score_samples(const Corpus& corpus, const std::vector<std::vector<Tensor<float>>>& samples);

/// Generates `per_class` inference-mode samples for every class, drawing
/// noise from `rng` class by class, and scores them.
ProxyResult evaluate_proxy(GeneratorNet<float>& g, const Corpus& corpus, const Tensor<float>& embeddings, Rng& rng,
                           std::size_t per_class = 8);

struct HistoryRow {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double d_loss = 0;
  double g_loss = 0;
  double d_real_acc = 0;
  bool gen_twice = false;
  bool restored = false;
};

struct EvalRecord {
  std::size_t eval = 0;  // 1-based
  std::size_t epoch = 0;
  std::size_t step = 0;
  double score = 0;
  double mean_l1 = 0;
  std::size_t class_matches = 0;
  double best_score = 0;
  bool improved = false;
  bool restored = false;
};

/// "step,epoch,d_loss,g_loss,d_real_acc,gen_twice,restored" with floats
/// at 9 significant digits.
std::string format_history_csv(const std::vector<HistoryRow>& rows);
std::string format_evals_csv(const std::vector<EvalRecord>& rows);

struct TrainHooks {
  /// Replaces evaluate_proxy when set; receives the 1-based eval index.
  std::function<double(std::size_t eval, GeneratorNet<float>& g)> score_override;
  /// Called after each eval has been fully applied (snapshot, restore).
  std::function<void(const EvalRecord& record, GeneratorNet<float>& g, DiscriminatorNet<float>& d,
                     const TrainState& state)>
      on_eval;
};

struct TrainResult {
  std::vector<HistoryRow> history;
  std::vector<EvalRecord> evals;
  std::optional<ProxyResult> best_proxy;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
  std::size_t epochs = 0;
  bool early_stopped = false;
  std::vector<TrainEvent> events;
  ParamFile best_checkpoint;   // falls back to the final model without evals
  ParamFile final_checkpoint;
};

/// Owns a generator/discriminator pair and trains it on a corpus. Random
/// streams derive from config.seed: "init" for weights, "noise" for z,
/// "shuffle" for batches and mismatches, "eval" (restarted per eval) for
/// proxy samples.
class Trainer {
 public:
  Trainer(const Corpus& corpus, Tensor<float> class_embeddings, const ArchConfig& arch, const TrainConfig& config);

  /// Runs to max_epochs / max_steps / early stop. Writes history.csv,
  /// evals.csv, best.ckpt and final.ckpt into out_dir when it is non-empty.
  TrainResult run(const std::filesystem::path& out_dir = {}, const TrainHooks& hooks = {});

  GeneratorNet<float>& generator() { return g_; }
  DiscriminatorNet<float>& discriminator() { return d_; }
  const TrainState& state() const { return state_; }
  const Tensor<float>& class_embeddings() const { return embeddings_; }

  ModelSnapshot snapshot() const;
  void restore(const ModelSnapshot& snap);
  ParamFile checkpoint(const nlohmann::json& extra = nlohmann::json::object()) const;

 private:
  const Corpus* corpus_;
  Tensor<float> embeddings_;
  ArchConfig arch_;
  TrainConfig config_;
  Rng root_;
  GeneratorNet<float> g_;
  DiscriminatorNet<float> d_;
  TrainState state_;
};

}  // namespace emojigan
