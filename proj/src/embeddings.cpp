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

#include "emojigan/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "emojigan/error.hpp"
#include "emojigan/rng.hpp"

namespace emojigan {

void Vocabulary::add(std::string word, std::vector<float> vector) {
  if (word.empty()) throw ParseError("vocabulary: empty word");
  if (vector.size() != dim_)
    throw ParseError("vocabulary: word '" + word + "' has dimension " + std::to_string(vector.size()) +
                     ", expected " + std::to_string(dim_));
  for (float v : vector)
    if (!std::isfinite(v)) throw ParseError("vocabulary: non-finite component in vector of '" + word + "'");
  if (index_.contains(word)) throw ParseError("vocabulary: duplicate word '" + word + "'");
  index_.emplace(word, entries_.size());
  const std::size_t dim = vector.size();
  entries_.push_back({std::move(word), Tensor<float>({dim}, std::move(vector))});
}

const WordEmbedding* Vocabulary::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Vocabulary::words() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.word);
  return out;
}

Vocabulary read_word2vec_binary(std::istream& in, const AllowList* allow) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("word2vec: missing header line");
  std::istringstream hs(header);
  long long count = -1, dim = -1;
  std::string trailing;
  if (!(hs >> count >> dim) || (hs >> trailing) || count < 0 || dim <= 0)
    throw ParseError("word2vec: malformed header '" + header + "', expected '<vocab_size> <dim>'");
  std::uint64_t offset = header.size() + 1;

  Vocabulary vocab(static_cast<std::size_t>(dim));
  std::vector<unsigned char> raw(4 * static_cast<std::size_t>(dim));
  for (long long r = 0; r < count; ++r) {
    int ch = in.get();
    while (ch != EOF && std::isspace(ch)) {
      ++offset;
      ch = in.get();
    }
    const std::uint64_t record_start = offset;
    if (ch == EOF)
      throw ParseError("word2vec: truncated file, expected " + std::to_string(count) + " records, found " +
                       std::to_string(r) + " (byte offset " + std::to_string(offset) + ")");
    std::string word;
    while (ch != EOF && !std::isspace(ch)) {
      word.push_back(static_cast<char>(ch));
      ++offset;
      ch = in.get();
    }
    if (ch == EOF)
      throw ParseError("word2vec: truncated record for '" + word + "' at byte offset " + std::to_string(record_start));
    ++offset;  // the terminating space
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != raw.size())
      throw ParseError("word2vec: truncated record for '" + word + "' at byte offset " +
                       std::to_string(record_start) + ": vector needs " + std::to_string(raw.size()) +
                       " bytes, file ends after " + std::to_string(got) + " (byte offset " +
                       std::to_string(offset + got) + ")");
    offset += got;
    if (allow != nullptr && !allow->contains(word)) continue;
    std::vector<float> vec(static_cast<std::size_t>(dim));
    for (std::size_t k = 0; k < vec.size(); ++k) {
      const unsigned char* b = raw.data() + 4 * k;
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
      vec[k] = std::bit_cast<float>(bits);
    }
    try {
      vocab.add(std::move(word), std::move(vec));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + " (record at byte offset " + std::to_string(record_start) + ")");
    }
  }
  return vocab;
}

Vocabulary load_word2vec_binary(const std::filesystem::path& path, const AllowList* allow) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file " + path.string());
  return read_word2vec_binary(in, allow);
}

void write_word2vec_binary(std::ostream& out, const Vocabulary& vocab) {
  out << vocab.size() << ' ' << vocab.dim() << '\n';
  for (const auto& e : vocab) {
    out << e.word << ' ';
    for (float v : e.vector.data()) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                             static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      out.write(bytes, 4);
    }
    out << '\n';
  }
  if (!out) throw IoError("word2vec: write failed");
}

void save_word2vec_binary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_word2vec_binary(out, vocab);
}

AllowList load_allow_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open allow-list " + path.string());
  AllowList words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
    if (start < line.size()) words.insert(line.substr(start));
  }
  return words;
}

Tensor<float> average_vectors(const Tensor<float>& a, const Tensor<float>& b) {
  if (a.shape() != b.shape())
    throw DimensionError("average_vectors: dimension mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  Tensor<float> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = (a[i] + b[i]) / 2.0f;
  return out;
}

Tensor<float> average_vectors(const WordEmbedding& a, const WordEmbedding& b) {
  return average_vectors(a.vector, b.vector);
}

double cosine_similarity(const Tensor<float>& a, const Tensor<float>& b) {
  if (a.shape() != b.shape())
    throw DimensionError("cosine_similarity: dimension mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Tensor<float> unit_normalized(const Tensor<float>& v) {
  double sq = 0.0;
  for (float x : v.data()) sq += static_cast<double>(x) * x;
  if (sq == 0.0) throw NumericError("unit_normalized: zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  Tensor<float> out(v.shape());
  for (std::size_t i = 0; i < v.numel(); ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

const std::vector<std::string>& fixture_words() {
  static const std::vector<std::string> words = {
      // synthetic emoji classes, in class order
      "smile", "sad", "angry", "surprised", "neutral", "laugh", "sick", "cold",
      "wink", "sleepy", "love", "cool", "cry", "scream", "grin", "confused",
      // remaining face-emoji words
      "happy", "joy", "blush", "grimace", "relieved", "pensive", "worried", "frown",
      "tired", "weary", "sob", "rage", "pout", "hug", "think", "shush",
      "smirk", "unamused", "eyeroll", "flushed", "dizzy", "mask", "nerd", "hot",
      "nauseated", "sneeze", "drool", "zany", "starstruck", "party", "monocle", "halo",
      "devil", "skull", "ghost", "alien", "robot", "clown", "yawn", "hush",
      "expressionless", "tongue", "yum", "kiss", "money", "lying", "upside", "sweat",
      "fear", "anguish", "astonished", "triumph", "disappointed", "persevere", "hurt", "bandage",
      "cowboy", "disguise", "pleading", "shaking", "woozy", "melting", "salute", "peek",
      "frustrated", "calm",
      // non-emoji extras
      "dog", "cat", "car", "tree", "house", "sun", "moon", "pizza"};
  return words;
}

Vocabulary make_fixture_vocabulary(std::size_t dim, std::uint64_t seed, double scale) {
  Vocabulary vocab(dim);
  const Rng base(seed);
  for (const auto& word : fixture_words()) {
    Rng rng = base.substream(word);
    std::vector<float> vec(dim);
    for (auto& v : vec) v = static_cast<float>(rng.normal(0.0, scale));
    vocab.add(word, std::move(vec));
  }
  return vocab;
}

}  // namespace emojigan
