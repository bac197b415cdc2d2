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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "emojigan/tensor.hpp"

namespace emojigan {

struct WordEmbedding {
  std::string word;
  Tensor<float> vector;  // [dim]
};

/// Ordered word -> vector table. Words are unique and share one dimension.
class Vocabulary {
 public:
  explicit Vocabulary(std::size_t dim = 0) : dim_(dim) {}

  /// Appends an entry; throws ParseError on duplicate word, dimension
  /// mismatch or non-finite component.
  void add(std::string word, std::vector<float> vector);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dim() const { return dim_; }

  const WordEmbedding& at(std::size_t i) const { return entries_.at(i); }
  const WordEmbedding* find(const std::string& word) const;
  std::optional<std::size_t> index_of(const std::string& word) const;
  std::vector<std::string> words() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t dim_;
  std::vector<WordEmbedding> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using AllowList = std::unordered_set<std::string>;

/// Parses the original word2vec binary layout:
///   "<vocab_size> <dim>\n", then per word a whitespace-terminated token
///   followed by dim little-endian float32 values (an optional trailing
///   newline per record is skipped as leading whitespace of the next token).
/// With an allow-list only the listed words are kept, in file order.
Vocabulary read_word2vec_binary(std::istream& in, const AllowList* allow = nullptr);
Vocabulary load_word2vec_binary(const std::filesystem::path& path, const AllowList* allow = nullptr);

/// Writes the same layout with a '\n' after each vector, as the reference
/// word2vec tool does.
void write_word2vec_binary(std::ostream& out, const Vocabulary& vocab);
void save_word2vec_binary(const std::filesystem::path& path, const Vocabulary& vocab);

/// Newline-separated words; blank lines ignored.
AllowList load_allow_list(const std::filesystem::path& path);

/// (a + b) / 2 elementwise.
Tensor<float> average_vectors(const WordEmbedding& a, const WordEmbedding& b);
Tensor<float> average_vectors(const Tensor<float>& a, const Tensor<float>& b);

/// dot / (|a| |b|); throws on zero vectors or dimension mismatch.
double cosine_similarity(const Tensor<float>& a, const Tensor<float>& b);

Tensor<float> unit_normalized(const Tensor<float>& v);

/// The 90 words of the bundled fixture vocabulary: 82 face-emoji words
/// (the first 16 name the synthetic emoji classes) followed by 8 non-emoji
/// extras.
const std::vector<std::string>& fixture_words();

/// Deterministic stand-in for pretrained vectors: each word gets
/// Normal(0, scale) components from a stream keyed by (seed, word).
Vocabulary make_fixture_vocabulary(std::size_t dim = 300, std::uint64_t seed = 2018, double scale = 0.15);

}  // namespace emojigan
