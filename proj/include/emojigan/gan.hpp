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
#include <string>
#include <vector>

#include "emojigan/dataset.hpp"
#include "emojigan/nn.hpp"
#include "emojigan/params.hpp"
#include "emojigan/rng.hpp"
#include "emojigan/tensor.hpp"

namespace emojigan {

/// Network sizes. Widths halve per resolution step: for image_size 32 and
/// base_channels 256 the generator runs 256 -> 128 -> 64 -> 3 over
/// 4 -> 8 -> 16 -> 32 pixels and the discriminator mirrors it.
struct ArchConfig {
  std::size_t noise_dim = 100;
  std::size_t embed_dim = 300;
  std::size_t embed_proj_dim = 128;
  std::size_t image_size = 32;
  std::size_t base_channels = 256;
  std::size_t image_channels = 3;

  void validate() const;
  /// Number of stride-2 stages between 4x4 and image_size.
  std::size_t stages() const;
  /// [base, base/2, ..., image_channels]; deconv k maps entry k to k+1.
  std::vector<std::size_t> generator_channels() const;
  /// [image_channels, ..., base]; conv k maps entry k to k+1.
  std::vector<std::size_t> discriminator_channels() const;

  nlohmann::json to_json() const;
  static ArchConfig from_json(const nlohmann::json& j);

  bool operator==(const ArchConfig&) const = default;
};

/// G(z, t): t -> dense(embed_proj) -> leaky_relu(0.2), concatenated with z,
/// dense to base*4*4, reshape, then batchnorm+relu and kernel-4 stride-2
/// pad-1 deconvolutions up to image_size, tanh on the last.
template <class T>
class GeneratorNet {
 public:
  explicit GeneratorNet(const ArchConfig& config);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& z, const Tensor<T>& t, bool training);
  /// Parameters followed by batchnorm running statistics, in a fixed order.
  ParamList<T> parameters() const;
  const ArchConfig& config() const { return config_; }

 private:
  ArchConfig config_;
  Dense<T> embed_proj_;
  Dense<T> input_proj_;
  BatchNorm<T> input_bn_;
  std::vector<Deconv2d<T>> deconvs_;
  std::vector<BatchNorm<T>> bns_;  // after every deconv but the last
};

/// D(v, t): kernel-4 stride-2 pad-1 convolutions with leaky_relu(0.2) down
/// to 4x4 (batchnorm on all but the first); t -> dense(embed_proj) ->
/// leaky_relu, replicated over the 4x4 grid and concatenated on channels;
/// a 1x1 conv back to base channels with batchnorm and leaky_relu; dense to
/// one logit; sigmoid. Scores are [N,1].
template <class T>
class DiscriminatorNet {
 public:
  explicit DiscriminatorNet(const ArchConfig& config);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& v, const Tensor<T>& t, bool training);
  ParamList<T> parameters() const;
  const ArchConfig& config() const { return config_; }

 private:
  ArchConfig config_;
  std::vector<Conv2d<T>> convs_;
  std::vector<BatchNorm<T>> bns_;  // bns_[k] follows convs_[k + 1]
  Dense<T> embed_proj_;
  Conv2d<T> joint_conv_;
  BatchNorm<T> joint_bn_;
  Dense<T> score_;
};

/// Inference-mode generation (batchnorm uses running statistics).
template <class T>
Tensor<T> generate(GeneratorNet<T>& g, const Tensor<T>& z, const Tensor<T>& t) {
  return g.forward(z, t, false);
}

/// Inference-mode scoring.
template <class T>
Tensor<T> discriminate(DiscriminatorNet<T>& d, const Tensor<T>& v, const Tensor<T>& t) {
  return d.forward(v, t, false);
}

/// Standard normal noise [n, dim].
Tensor<float> sample_noise(std::size_t n, std::size_t dim, Rng& rng);

/// Scores are clamped to [eps, 1 - eps] before every log.
inline constexpr double kScoreEpsilon = 1e-7;

/// mean(log d_real) + mean(log(1 - d_fake)): the empirical min-max value.
template <class T>
Tensor<T> minimax_value(const Tensor<T>& d_real, const Tensor<T>& d_fake);

/// BCE(s, 1) = -mean(log s).
template <class T>
Tensor<T> bce_real(const Tensor<T>& scores);
/// BCE(s, 0) = -mean(log(1 - s)).
template <class T>
Tensor<T> bce_fake(const Tensor<T>& scores);

struct LossWeights {
  double real_true = 1.0 / 3.0;
  double real_mismatched = 1.0 / 3.0;
  double fake_true = 1.0 / 3.0;

  /// Throws std::invalid_argument unless all weights are >= 0 and sum to 1.
  void validate() const;
};

/// w1 * BCE(s_rt, 1) + w2 * BCE(s_rf, 0) + w3 * BCE(s_ft, 0) over scores of
/// (real image, true label), (real image, mismatched label) and
/// (fake image, true label). Terms with zero weight are skipped.
template <class T>
Tensor<T> discriminator_loss_threepart(const Tensor<T>& s_rt, const Tensor<T>& s_rf, const Tensor<T>& s_ft,
                                       const LossWeights& weights = {});

/// Non-saturating generator loss -mean(log s) on D's scores of fakes paired
/// with their true labels.
template <class T>
Tensor<T> generator_loss(const Tensor<T>& s_fake_true);

/// Saturating form mean(log(1 - s)) taken literally from the min-max
/// objective; the generator minimizes it.
template <class T>
Tensor<T> generator_loss_literal(const Tensor<T>& s_fake_true);

using ScoreTable = std::vector<std::vector<double>>;

/// Image/label matching error as a [0, 1] metric. table[i][j] is D's mean
/// compatibility of class-i images with class-j embeddings; the image
/// classifier picks argmax_j table[i][j], the label classifier picks
/// argmax_i table[i][j] (ties -> lowest index). Returns the prior-weighted
/// 0-1 error of each, averaged. Empty priors mean uniform.
double structured_loss(const ScoreTable& table, const std::vector<double>& class_priors = {});

/// Fills the score table by running D in inference mode over every
/// (class-i images, class-j embedding) pairing. `priors` receives each
/// class's share of the corpus when non-null.
ScoreTable compute_score_table(DiscriminatorNet<float>& d, const Corpus& corpus, const Tensor<float>& embeddings,
                               std::vector<double>* priors = nullptr);

/// Self-describing model file: the parameter file format with a header
///   {"format": "emojigan-checkpoint", "version": 1, "arch": {...},
///    "classes": [word, ...], ...extra}
/// and tensors generator.*, discriminator.*, conditioning.class_embeddings.
ParamFile make_checkpoint(const GeneratorNet<float>& g, const DiscriminatorNet<float>& d,
                          const std::vector<std::string>& class_words, const Tensor<float>& class_embeddings,
                          const nlohmann::json& extra = nlohmann::json::object());

struct Model {
  ArchConfig arch;
  GeneratorNet<float> generator;
  DiscriminatorNet<float> discriminator;
  std::vector<std::string> class_words;
  Tensor<float> class_embeddings;  // [classes, embed_dim]
  nlohmann::json header;

  /// Row of class_embeddings for `word`; throws std::invalid_argument
  /// listing the known words if absent.
  Tensor<float> embedding_of(const std::string& word) const;
};

Model model_from_checkpoint(const ParamFile& file);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace emojigan
