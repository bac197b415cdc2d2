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

#include "emojigan/embeddings.hpp"
#include "emojigan/image.hpp"
#include "emojigan/rng.hpp"
#include "emojigan/tensor.hpp"

namespace emojigan {

struct ImageSample {
  Tensor<float> pixels;  // [3,H,W] in [-1,1]
  std::size_t label = 0;
  std::string word;
};

/// Labeled images; class i is conditioned on class_words[i].
struct Corpus {
  std::vector<ImageSample> samples;
  std::vector<std::string> class_words;
  std::size_t image_size = 32;

  std::size_t size() const { return samples.size(); }
  std::size_t num_classes() const { return class_words.size(); }
};

struct ManifestRow {
  std::string filename;
  std::string word;
};

/// Two-column CSV `filename,word`, no header row. Blank lines are skipped.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);

/// Loads every manifest image from `image_dir` at size x size. Class indices
/// follow the order in which words first appear in the manifest. When
/// `vocab` is given every word must be present in it.
Corpus load_corpus(const std::filesystem::path& manifest, const std::filesystem::path& image_dir, std::size_t size,
                   const Vocabulary* vocab = nullptr);

inline constexpr std::size_t kMaxSyntheticClasses = 16;

/// Procedural face emoji of class `cls` (< 16): a filled disc with
/// class-specific eyes, mouth and extras, with small per-sample jitter of
/// position, radius, feature height and brightness drawn from `rng`.
RgbImage render_synthetic_emoji(std::size_t cls, std::size_t size, Rng& rng);

/// per_class samples of each of the first num_classes synthetic classes,
/// class-major. Words come from fixture_words(). Pixels are quantized to 8
/// bits so the corpus matches what make-synth writes to disk.
Corpus make_synthetic_corpus(std::size_t num_classes, std::size_t per_class, std::size_t size, Rng& rng);

/// Conditioning table [num_classes, dim]: row i is the vector of class_words[i].
/// Throws std::invalid_argument naming the first word missing from vocab.
Tensor<float> class_embeddings(const Corpus& corpus, const Vocabulary& vocab, bool normalize = false);

struct Batch {
  Tensor<float> images;                 // [N,3,H,W]
  Tensor<float> true_embeddings;        // [N,dim]
  Tensor<float> mismatched_embeddings;  // [N,dim], row i from a class != labels[i]
  std::vector<std::size_t> labels;
  std::vector<std::size_t> mismatched_labels;
  std::vector<std::size_t> indices;  // corpus positions
};

/// Epoch-wise shuffled batches. Each epoch is a fresh permutation of the
/// corpus cut into consecutive batches; the final batch of an epoch may be
/// short so every sample appears exactly once per epoch.
class BatchSampler {
 public:
  BatchSampler(const Corpus& corpus, Tensor<float> embeddings, std::size_t batch_size, Rng rng);
  BatchSampler(const Corpus& corpus, const Vocabulary& vocab, std::size_t batch_size, Rng rng,
               bool normalize = false);

  /// Next batch, starting a new epoch when the current one is exhausted.
  Batch next();
  /// All remaining batches of the current epoch (a full epoch when called
  /// on an epoch boundary).
  std::vector<Batch> epoch();

  std::size_t batches_per_epoch() const { return (corpus_->size() + batch_size_ - 1) / batch_size_; }
  std::size_t epochs_started() const { return epochs_started_; }
  const Tensor<float>& embeddings() const { return embeddings_; }

 private:
  void start_epoch();

  const Corpus* corpus_;
  Tensor<float> embeddings_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epochs_started_ = 0;
};

}  // namespace emojigan
