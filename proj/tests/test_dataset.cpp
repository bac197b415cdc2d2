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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "emojigan/dataset.hpp"
#include "emojigan/embeddings.hpp"
#include "emojigan/error.hpp"
#include "test_util.hpp"

namespace emojigan {
namespace {

double mean_abs_diff(const Tensor<float>& a, const Tensor<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(double(a[i]) - b[i]);
  return s / a.numel();
}

TEST(Synthetic, DeterministicForSeed) {
  Rng a(5), b(5), c(6);
  const Corpus x = make_synthetic_corpus(8, 5, 32, a), y = make_synthetic_corpus(8, 5, 32, b),
               z = make_synthetic_corpus(8, 5, 32, c);
  ASSERT_EQ(x.size(), 40u);
  bool any_diff = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x.samples[i].label, y.samples[i].label);
    for (std::size_t j = 0; j < x.samples[i].pixels.numel(); ++j)
      ASSERT_EQ(x.samples[i].pixels[j], y.samples[i].pixels[j]);
    any_diff = any_diff || mean_abs_diff(x.samples[i].pixels, z.samples[i].pixels) > 0;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Synthetic, ShapesLabelsAndWords) {
  Rng rng(1);
  const Corpus c = make_synthetic_corpus(8, 5, 32, rng);
  EXPECT_EQ(c.num_classes(), 8u);
  EXPECT_EQ(c.image_size, 32u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& s = c.samples[i];
    EXPECT_EQ(s.pixels.shape(), (Shape{3, 32, 32}));
    EXPECT_EQ(s.label, i / 5);
    EXPECT_EQ(s.word, c.class_words[s.label]);
    EXPECT_EQ(s.word, fixture_words()[s.label]);
    for (float v : s.pixels.data()) {
      ASSERT_GE(v, -1.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
  EXPECT_THROW(make_synthetic_corpus(17, 1, 32, rng), std::invalid_argument);
  EXPECT_THROW(make_synthetic_corpus(0, 1, 32, rng), std::invalid_argument);
}

// Classes must be separable: every class mean is closer to its own samples
// than any other class mean is.
TEST(Synthetic, ClassesAreVisuallyDistinct) {
  Rng rng(2);
  const Corpus c = make_synthetic_corpus(16, 6, 32, rng);
  double intra = 0, inter = 0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double d = mean_abs_diff(c.samples[i].pixels, c.samples[j].pixels);
      if (c.samples[i].label == c.samples[j].label) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  EXPECT_GT(inter / n_inter, 1.5 * intra / n_intra);
  // Samples within a class still vary.
  EXPECT_GT(intra, 0.0);
}

TEST(Synthetic, EveryClassRendersAt64) {
  for (std::size_t cls = 0; cls < kMaxSyntheticClasses; ++cls) {
    Rng rng(cls);
    const RgbImage img = render_synthetic_emoji(cls, 64, rng);
    EXPECT_EQ(img.width, 64u);
  }
  Rng rng(0);
  EXPECT_THROW(render_synthetic_emoji(16, 32, rng), std::invalid_argument);
}

TEST(Manifest, RoundTripAndErrors) {
  emojigan::testing::TempDir dir("manifest");
  write_manifest(dir / "m.csv", {{"a.ppm", "happy"}, {"b.ppm", "sad"}});
  const auto rows = read_manifest(dir / "m.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].filename, "b.ppm");
  EXPECT_EQ(rows[1].word, "sad");
  emojigan::testing::write_bytes(dir / "bad.csv", "a.ppm,happy\n\nonlyone\n");
  try {
    read_manifest(dir / "bad.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_manifest(dir / "none.csv"), IoError);
}

TEST(Manifest, LoadCorpusOrdersClassesByFirstAppearance) {
  emojigan::testing::TempDir dir("corpus");
  Rng rng(3);
  for (std::size_t cls : {0u, 1u}) write_ppm(dir / ("c" + std::to_string(cls) + ".ppm"), render_synthetic_emoji(cls, 16, rng));
  write_manifest(dir / "m.csv", {{"c1.ppm", "sad"}, {"c0.ppm", "happy"}, {"c1.ppm", "sad"}});
  const Corpus c = load_corpus(dir / "m.csv", dir.path(), 32);
  EXPECT_EQ(c.class_words, (std::vector<std::string>{"sad", "happy"}));
  EXPECT_EQ(c.samples[1].label, 1u);
  EXPECT_EQ(c.samples[0].pixels.shape(), (Shape{3, 32, 32}));

  Vocabulary vocab(2);
  vocab.add("sad", {1, 0});
  EXPECT_THROW(load_corpus(dir / "m.csv", dir.path(), 32, &vocab), std::invalid_argument);
  write_manifest(dir / "missing.csv", {{"nothere.ppm", "sad"}});
  EXPECT_THROW(load_corpus(dir / "missing.csv", dir.path(), 32), IoError);
}

TEST(ClassEmbeddings, RowsFollowClassWords) {
  Rng rng(4);
  const Corpus c = make_synthetic_corpus(3, 2, 32, rng);
  const Vocabulary v = make_fixture_vocabulary();
  const Tensor<float> table = class_embeddings(c, v);
  EXPECT_EQ(table.shape(), (Shape{3, 300}));
  EXPECT_EQ(table[300 + 7], v.find(c.class_words[1])->vector[7]);
  const Tensor<float> unit = class_embeddings(c, v, true);
  double sq = 0;
  for (std::size_t j = 0; j < 300; ++j) sq += double(unit[j]) * unit[j];
  EXPECT_NEAR(sq, 1.0, 1e-5);
  Vocabulary small(300);
  try {
    class_embeddings(c, small);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(c.class_words[0]), std::string::npos);
  }
}

TEST(Sampler, EpochCoversEverySampleOnce) {
  Rng rng(5);
  const Corpus c = make_synthetic_corpus(8, 5, 32, rng);
  BatchSampler sampler(c, make_fixture_vocabulary(), 8, Rng(9));
  EXPECT_EQ(sampler.batches_per_epoch(), 5u);
  const auto batches = sampler.epoch();
  ASSERT_EQ(batches.size(), 5u);
  std::multiset<std::size_t> seen;
  for (const auto& b : batches) {
    EXPECT_EQ(b.images.shape(), (Shape{8, 3, 32, 32}));
    EXPECT_EQ(b.true_embeddings.shape(), (Shape{8, 300}));
    seen.insert(b.indices.begin(), b.indices.end());
  }
  EXPECT_EQ(seen.size(), 40u);
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), 40u);
}

TEST(Sampler, ShortFinalBatch) {
  Rng rng(6);
  const Corpus c = make_synthetic_corpus(3, 5, 32, rng);
  BatchSampler sampler(c, make_fixture_vocabulary(), 4, Rng(1));
  const auto batches = sampler.epoch();
  ASSERT_EQ(batches.size(), 4u);
  EXPECT_EQ(batches.back().labels.size(), 3u);
}

TEST(Sampler, MismatchedEmbeddingsComeFromAnotherClass) {
  Rng rng(7);
  const Corpus c = make_synthetic_corpus(4, 5, 32, rng);
  const Vocabulary v = make_fixture_vocabulary();
  const Tensor<float> table = class_embeddings(c, v);
  BatchSampler sampler(c, v, 5, Rng(2));
  for (int step = 0; step < 40; ++step) {
    const Batch b = sampler.next();
    for (std::size_t i = 0; i < b.labels.size(); ++i) {
      const std::size_t idx = b.indices[i];
      EXPECT_EQ(b.labels[i], c.samples[idx].label);
      ASSERT_NE(b.mismatched_labels[i], b.labels[i]);
      for (std::size_t j = 0; j < 300; j += 37) {
        ASSERT_EQ(b.true_embeddings[i * 300 + j], table[b.labels[i] * 300 + j]);
        ASSERT_EQ(b.mismatched_embeddings[i * 300 + j], table[b.mismatched_labels[i] * 300 + j]);
      }
      for (std::size_t j = 0; j < 3 * 32 * 32; j += 101)
        ASSERT_EQ(b.images[i * 3 * 32 * 32 + j], c.samples[idx].pixels[j]);
    }
  }
  EXPECT_EQ(sampler.epochs_started(), 10u);
}

TEST(Sampler, SameSeedSameOrderDifferentEpochsDiffer) {
  Rng rng(8);
  const Corpus c = make_synthetic_corpus(4, 5, 32, rng);
  const Vocabulary v = make_fixture_vocabulary();
  BatchSampler a(c, v, 20, Rng(3)), b(c, v, 20, Rng(3));
  const Batch a1 = a.next(), b1 = b.next(), a2 = a.next();
  EXPECT_EQ(a1.indices, b1.indices);
  EXPECT_EQ(a1.mismatched_labels, b1.mismatched_labels);
  EXPECT_NE(a1.indices, a2.indices);
}

TEST(Sampler, Validation) {
  Rng rng(9);
  const Corpus c = make_synthetic_corpus(2, 2, 32, rng);
  const Vocabulary v = make_fixture_vocabulary();
  EXPECT_THROW(BatchSampler(c, v, 0, Rng(1)), std::invalid_argument);
  EXPECT_THROW(BatchSampler(c, v, 5, Rng(1)), std::invalid_argument);
  const Corpus one = make_synthetic_corpus(1, 2, 32, rng);
  EXPECT_THROW(BatchSampler(one, v, 1, Rng(1)), std::invalid_argument);
}

}  // namespace
}  // namespace emojigan
