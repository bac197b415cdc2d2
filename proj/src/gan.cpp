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

#include "emojigan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emojigan/error.hpp"
#include "emojigan/ops.hpp"

namespace emojigan {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr std::size_t kBaseGrid = 4;
constexpr char kCheckpointFormat[] = "emojigan-checkpoint";
constexpr char kEmbeddingTensor[] = "conditioning.class_embeddings";

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

template <class T>
void mark_trainable(const ParamList<T>& params) {
  for (const auto& p : params)
    if (p.trainable) p.tensor.storage()->requires_grad = true;
}

void check_input(const char* who, const char* what, const Shape& shape, std::size_t n, std::size_t dim) {
  if (shape.size() != 2 || shape[0] != n || shape[1] != dim)
    throw DimensionError(std::string(who) + ": expected " + what + " [" + std::to_string(n) + "," +
                         std::to_string(dim) + "], got " + shape_str(shape));
}

}  // namespace

void ArchConfig::validate() const {
  if (noise_dim == 0 || embed_dim == 0 || embed_proj_dim == 0 || image_channels == 0)
    throw std::invalid_argument("arch: dimensions must be positive");
  if (image_size < 2 * kBaseGrid || !is_power_of_two(image_size))
    throw std::invalid_argument("arch: image_size must be a power of two >= 8, got " + std::to_string(image_size));
  const std::size_t divisor = std::size_t{1} << (stages() - 1);
  if (base_channels == 0 || base_channels % divisor != 0)
    throw std::invalid_argument("arch: base_channels " + std::to_string(base_channels) + " must be divisible by " +
                                std::to_string(divisor));
}

std::size_t ArchConfig::stages() const {
  std::size_t n = 0;
  for (std::size_t s = kBaseGrid; s < image_size; s *= 2) ++n;
  return n;
}

std::vector<std::size_t> ArchConfig::generator_channels() const {
  std::vector<std::size_t> ch;
  const std::size_t n = stages();
  for (std::size_t k = 0; k < n; ++k) ch.push_back(base_channels >> k);
  ch.push_back(image_channels);
  return ch;
}

std::vector<std::size_t> ArchConfig::discriminator_channels() const {
  std::vector<std::size_t> ch{image_channels};
  const std::size_t n = stages();
  for (std::size_t k = 0; k < n; ++k) ch.push_back(base_channels >> (n - 1 - k));
  return ch;
}

nlohmann::json ArchConfig::to_json() const {
  return {{"noise_dim", noise_dim},         {"embed_dim", embed_dim},         {"embed_proj_dim", embed_proj_dim},
          {"image_size", image_size},       {"base_channels", base_channels}, {"image_channels", image_channels}};
}

ArchConfig ArchConfig::from_json(const nlohmann::json& j) {
  ArchConfig c;
  try {
    c.noise_dim = j.at("noise_dim").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.embed_proj_dim = j.at("embed_proj_dim").get<std::size_t>();
    c.image_size = j.at("image_size").get<std::size_t>();
    c.base_channels = j.at("base_channels").get<std::size_t>();
    c.image_channels = j.at("image_channels").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("arch: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Generator

template <class T>
GeneratorNet<T>::GeneratorNet(const ArchConfig& config) : config_(config) {
  config_.validate();
  const auto ch = config_.generator_channels();
  embed_proj_ = Dense<T>(config_.embed_dim, config_.embed_proj_dim);
  input_proj_ = Dense<T>(config_.noise_dim + config_.embed_proj_dim, ch[0] * kBaseGrid * kBaseGrid);
  input_bn_ = BatchNorm<T>(ch[0]);
  for (std::size_t k = 0; k + 1 < ch.size(); ++k) {
    deconvs_.emplace_back(ch[k], ch[k + 1], 4, 2, 1);
    if (k + 2 < ch.size()) bns_.emplace_back(ch[k + 1]);
  }
  mark_trainable(parameters());
}

template <class T>
void GeneratorNet<T>::init(Rng& rng) {
  init_params(embed_proj_, rng);
  init_params(input_proj_, rng);
  init_params(input_bn_, rng);
  for (auto& l : deconvs_) init_params(l, rng);
  for (auto& l : bns_) init_params(l, rng);
}

template <class T>
Tensor<T> GeneratorNet<T>::forward(const Tensor<T>& z, const Tensor<T>& t, bool training) {
  if (z.rank() != 2) throw DimensionError("generator: expected z [N," + std::to_string(config_.noise_dim) + "], got " +
                                          shape_str(z.shape()));
  const std::size_t n = z.dim(0);
  check_input("generator", "z", z.shape(), n, config_.noise_dim);
  check_input("generator", "t", t.shape(), n, config_.embed_dim);
  const T slope = T(kLeakySlope);
  Tensor<T> e = leaky_relu(embed_proj_.forward(t), slope);
  Tensor<T> h = input_proj_.forward(concat<T>({z, e}, 1));
  h = reshape(h, {n, config_.base_channels, kBaseGrid, kBaseGrid});
  h = relu(input_bn_.forward(h, training));
  for (std::size_t k = 0; k < deconvs_.size(); ++k) {
    h = deconvs_[k].forward(h);
    h = k < bns_.size() ? relu(bns_[k].forward(h, training)) : tanh(h);
  }
  return h;
}

template <class T>
ParamList<T> GeneratorNet<T>::parameters() const {
  ParamList<T> out;
  embed_proj_.collect("generator.embed_proj", out);
  input_proj_.collect("generator.input_proj", out);
  input_bn_.collect("generator.input_bn", out);
  for (std::size_t k = 0; k < deconvs_.size(); ++k) {
    deconvs_[k].collect("generator.deconv" + std::to_string(k), out);
    if (k < bns_.size()) bns_[k].collect("generator.bn" + std::to_string(k), out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discriminator

template <class T>
DiscriminatorNet<T>::DiscriminatorNet(const ArchConfig& config) : config_(config) {
  config_.validate();
  const auto ch = config_.discriminator_channels();
  for (std::size_t k = 0; k + 1 < ch.size(); ++k) {
    convs_.emplace_back(ch[k], ch[k + 1], 4, 2, 1);
    if (k > 0) bns_.emplace_back(ch[k + 1]);
  }
  embed_proj_ = Dense<T>(config_.embed_dim, config_.embed_proj_dim);
  joint_conv_ = Conv2d<T>(config_.base_channels + config_.embed_proj_dim, config_.base_channels, 1, 1, 0);
  joint_bn_ = BatchNorm<T>(config_.base_channels);
  score_ = Dense<T>(config_.base_channels * kBaseGrid * kBaseGrid, 1);
  mark_trainable(parameters());
}

template <class T>
void DiscriminatorNet<T>::init(Rng& rng) {
  for (auto& l : convs_) init_params(l, rng);
  for (auto& l : bns_) init_params(l, rng);
  init_params(embed_proj_, rng);
  init_params(joint_conv_, rng);
  init_params(joint_bn_, rng);
  init_params(score_, rng);
}

template <class T>
Tensor<T> DiscriminatorNet<T>::forward(const Tensor<T>& v, const Tensor<T>& t, bool training) {
  const std::size_t size = config_.image_size;
  if (v.rank() != 4 || v.dim(1) != config_.image_channels || v.dim(2) != size || v.dim(3) != size)
    throw DimensionError("discriminator: expected images [N," + std::to_string(config_.image_channels) + "," +
                         std::to_string(size) + "," + std::to_string(size) + "], got " + shape_str(v.shape()));
  const std::size_t n = v.dim(0);
  check_input("discriminator", "t", t.shape(), n, config_.embed_dim);
  const T slope = T(kLeakySlope);
  Tensor<T> h = v;
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    h = convs_[k].forward(h);
    if (k > 0) h = bns_[k - 1].forward(h, training);
    h = leaky_relu(h, slope);
  }
  const std::size_t p = config_.embed_proj_dim;
  Tensor<T> e = leaky_relu(embed_proj_.forward(t), slope);
  e = broadcast_to(reshape(e, {n, p, 1, 1}), {n, p, kBaseGrid, kBaseGrid});
  h = concat<T>({h, e}, 1);
  h = leaky_relu(joint_bn_.forward(joint_conv_.forward(h), training), slope);
  h = reshape(h, {n, config_.base_channels * kBaseGrid * kBaseGrid});
  return sigmoid(score_.forward(h));
}

template <class T>
ParamList<T> DiscriminatorNet<T>::parameters() const {
  ParamList<T> out;
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    convs_[k].collect("discriminator.conv" + std::to_string(k), out);
    if (k > 0) bns_[k - 1].collect("discriminator.bn" + std::to_string(k), out);
  }
  embed_proj_.collect("discriminator.embed_proj", out);
  joint_conv_.collect("discriminator.joint_conv", out);
  joint_bn_.collect("discriminator.joint_bn", out);
  score_.collect("discriminator.score", out);
  return out;
}

template class GeneratorNet<float>;
template class GeneratorNet<double>;
template class DiscriminatorNet<float>;
template class DiscriminatorNet<double>;

Tensor<float> sample_noise(std::size_t n, std::size_t dim, Rng& rng) {
  Tensor<float> z({n, dim});
  for (auto& v : z.data()) v = static_cast<float>(rng.normal());
  return z;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

template <class T>
Tensor<T> clamp_scores(const Tensor<T>& s) {
  return clamp(s, T(kScoreEpsilon), T(1 - kScoreEpsilon));
}

template <class T>
Tensor<T> mean_log(const Tensor<T>& s) {
  return mean(log(clamp_scores(s)));
}

template <class T>
Tensor<T> mean_log_one_minus(const Tensor<T>& s) {
  return mean(log(add_scalar(scale(clamp_scores(s), T(-1)), T(1))));
}

}  // namespace

template <class T>
Tensor<T> minimax_value(const Tensor<T>& d_real, const Tensor<T>& d_fake) {
  return add(mean_log(d_real), mean_log_one_minus(d_fake));
}

template <class T>
Tensor<T> bce_real(const Tensor<T>& scores) {
  return scale(mean_log(scores), T(-1));
}

template <class T>
Tensor<T> bce_fake(const Tensor<T>& scores) {
  return scale(mean_log_one_minus(scores), T(-1));
}

void LossWeights::validate() const {
  if (real_true < 0 || real_mismatched < 0 || fake_true < 0)
    throw std::invalid_argument("loss weights must be non-negative");
  const double total = real_true + real_mismatched + fake_true;
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("loss weights must sum to 1, got " + std::to_string(total));
}

template <class T>
Tensor<T> discriminator_loss_threepart(const Tensor<T>& s_rt, const Tensor<T>& s_rf, const Tensor<T>& s_ft,
                                       const LossWeights& weights) {
  weights.validate();
  Tensor<T> total;
  auto accumulate = [&](double w, Tensor<T> term) {
    term = scale(term, T(w));
    total = total.defined() ? add(total, term) : term;
  };
  if (weights.real_true > 0) accumulate(weights.real_true, bce_real(s_rt));
  if (weights.real_mismatched > 0) accumulate(weights.real_mismatched, bce_fake(s_rf));
  if (weights.fake_true > 0) accumulate(weights.fake_true, bce_fake(s_ft));
  return total;
}

template <class T>
Tensor<T> generator_loss(const Tensor<T>& s_fake_true) {
  return bce_real(s_fake_true);
}

template <class T>
Tensor<T> generator_loss_literal(const Tensor<T>& s_fake_true) {
  return mean_log_one_minus(s_fake_true);
}

#define EMOJIGAN_INSTANTIATE_LOSSES(T)                                                                    \
  template Tensor<T> minimax_value(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> bce_real(const Tensor<T>&);                                                         \
  template Tensor<T> bce_fake(const Tensor<T>&);                                                         \
  template Tensor<T> discriminator_loss_threepart(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                                  const LossWeights&);                                   \
  template Tensor<T> generator_loss(const Tensor<T>&);                                                   \
  template Tensor<T> generator_loss_literal(const Tensor<T>&);

EMOJIGAN_INSTANTIATE_LOSSES(float)
EMOJIGAN_INSTANTIATE_LOSSES(double)
#undef EMOJIGAN_INSTANTIATE_LOSSES

// ---------------------------------------------------------------------------
// Structured loss

double structured_loss(const ScoreTable& table, const std::vector<double>& class_priors) {
  const std::size_t c = table.size();
  if (c == 0) throw DimensionError("structured_loss: empty score table");
  for (const auto& row : table)
    if (row.size() != c) throw DimensionError("structured_loss: score table must be square");
  std::vector<double> priors = class_priors;
  if (priors.empty()) priors.assign(c, 1.0);
  if (priors.size() != c) throw DimensionError("structured_loss: priors size does not match table");
  double total = 0;
  for (double p : priors) {
    if (!(p >= 0)) throw std::invalid_argument("structured_loss: priors must be non-negative");
    total += p;
  }
  if (total <= 0) throw std::invalid_argument("structured_loss: priors sum to zero");

  double image_error = 0, label_error = 0;
  for (std::size_t i = 0; i < c; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (table[i][j] > table[i][best]) best = j;
    if (best != i) image_error += priors[i];
  }
  for (std::size_t j = 0; j < c; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < c; ++i)
      if (table[i][j] > table[best][j]) best = i;
    if (best != j) label_error += priors[j];
  }
  return 0.5 * (image_error + label_error) / total;
}

ScoreTable compute_score_table(DiscriminatorNet<float>& d, const Corpus& corpus, const Tensor<float>& embeddings,
                               std::vector<double>* priors) {
  const std::size_t c = corpus.num_classes();
  if (embeddings.rank() != 2 || embeddings.dim(0) != c)
    throw DimensionError("compute_score_table: expected embeddings [" + std::to_string(c) + ",dim], got " +
                         shape_str(embeddings.shape()));
  const std::size_t dim = embeddings.dim(1);
  std::vector<std::vector<std::size_t>> members(c);
  for (std::size_t k = 0; k < corpus.size(); ++k) members.at(corpus.samples[k].label).push_back(k);

  NoGradScope<float> no_grad;
  constexpr std::size_t kChunk = 64;
  ScoreTable table(c, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < c; ++i) {
    const auto& idx = members[i];
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
      const std::size_t n = std::min(kChunk, idx.size() - start);
      const Shape cell = corpus.samples[idx[start]].pixels.shape();
      const std::size_t cell_numel = shape_numel(cell);
      Tensor<float> images({n, cell[0], cell[1], cell[2]});
      for (std::size_t r = 0; r < n; ++r) {
        auto src = corpus.samples[idx[start + r]].pixels.data();
        std::copy(src.begin(), src.end(), images.data().begin() + r * cell_numel);
      }
      for (std::size_t j = 0; j < c; ++j) {
        Tensor<float> t({n, dim});
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t q = 0; q < dim; ++q) t[r * dim + q] = embeddings[j * dim + q];
        const Tensor<float> s = d.forward(images, t, false);
        for (float v : s.data()) table[i][j] += v;
      }
    }
    if (!idx.empty())
      for (auto& v : table[i]) v /= static_cast<double>(idx.size());
  }
  if (priors != nullptr) {
    priors->assign(c, 0.0);
    for (std::size_t i = 0; i < c; ++i)
      (*priors)[i] = static_cast<double>(members[i].size()) / static_cast<double>(corpus.size());
  }
  return table;
}

// ---------------------------------------------------------------------------
// Checkpoints

ParamFile make_checkpoint(const GeneratorNet<float>& g, const DiscriminatorNet<float>& d,
                          const std::vector<std::string>& class_words, const Tensor<float>& class_embeddings,
                          const nlohmann::json& extra) {
  if (class_embeddings.rank() != 2 || class_embeddings.dim(0) != class_words.size() ||
      class_embeddings.dim(1) != g.config().embed_dim)
    throw DimensionError("make_checkpoint: class embeddings " + shape_str(class_embeddings.shape()) +
                         " do not match " + std::to_string(class_words.size()) + " classes of dim " +
                         std::to_string(g.config().embed_dim));
  ParamList<float> all = g.parameters();
  for (auto& p : d.parameters()) all.push_back(p);
  all.push_back({kEmbeddingTensor, class_embeddings, false});
  nlohmann::json header = extra;
  header["format"] = kCheckpointFormat;
  header["version"] = 1;
  header["arch"] = g.config().to_json();
  header["classes"] = class_words;
  return to_param_file(all, header);
}

Model model_from_checkpoint(const ParamFile& file) {
  const auto& h = file.header;
  if (!h.is_object() || h.value("format", std::string()) != kCheckpointFormat)
    throw ParseError("checkpoint: not an emojigan checkpoint");
  if (!h.contains("arch") || !h.contains("classes")) throw ParseError("checkpoint: header lacks arch or classes");
  const ArchConfig arch = ArchConfig::from_json(h.at("arch"));
  Model model{arch, GeneratorNet<float>(arch), DiscriminatorNet<float>(arch), {}, {}, h};
  try {
    model.class_words = h.at("classes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: bad classes: ") + e.what());
  }
  ParamList<float> g = model.generator.parameters();
  ParamList<float> d = model.discriminator.parameters();
  assign_params(file, g);
  assign_params(file, d);
  const StoredTensor* emb = file.find(kEmbeddingTensor);
  if (emb == nullptr) throw ParseError(std::string("checkpoint: missing tensor ") + kEmbeddingTensor);
  const Shape expected{model.class_words.size(), arch.embed_dim};
  if (emb->shape != expected)
    throw ParseError("checkpoint: class embeddings have shape " + shape_str(emb->shape) + ", expected " +
                     shape_str(expected));
  model.class_embeddings = Tensor<float>(emb->shape, emb->values);
  return model;
}

Model load_checkpoint(const std::filesystem::path& path) { return model_from_checkpoint(load_param_file(path)); }

Tensor<float> Model::embedding_of(const std::string& word) const {
  const auto it = std::find(class_words.begin(), class_words.end(), word);
  if (it == class_words.end()) {
    std::string known;
    for (const auto& w : class_words) known += (known.empty() ? "" : ", ") + w;
    throw std::invalid_argument("unknown word '" + word + "'; known words: " + known);
  }
  const std::size_t row = static_cast<std::size_t>(it - class_words.begin());
  const std::size_t dim = class_embeddings.dim(1);
  Tensor<float> v({dim});
  for (std::size_t q = 0; q < dim; ++q) v[q] = class_embeddings[row * dim + q];
  return v;
}

}  // namespace emojigan
