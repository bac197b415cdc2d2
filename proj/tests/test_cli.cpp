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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "emojigan/cli.hpp"
#include "emojigan/dataset.hpp"
#include "emojigan/embeddings.hpp"
#include "emojigan/image.hpp"
#include "test_util.hpp"

namespace emojigan {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// A short synthetic training run shared by the generate/blend tests.
class TrainedModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new emojigan::testing::TempDir("cli_model");
    const CliResult r = cli({"train", "--synthetic", "--classes", "2", "--per-class", "3", "--base-channels", "8",
                       "--max-steps", "4", "--batch", "3", "--eval-every", "1", "--seed", "5", "--out",
                       (dir_->path() / "run").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    train_out_ = r.out;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path run_dir() { return dir_->path() / "run"; }
  static fs::path ckpt() { return run_dir() / "best.ckpt"; }

  static inline emojigan::testing::TempDir* dir_ = nullptr;
  static inline std::string train_out_;
};

TEST_F(TrainedModel, TrainWritesArtifacts) {
  for (const char* f : {"history.csv", "evals.csv", "best.ckpt", "final.ckpt", "samples/eval_0001.ppm"})
    EXPECT_TRUE(fs::exists(run_dir() / f)) << f;
  const auto history = split_lines(emojigan::testing::read_bytes(run_dir() / "history.csv"));
  ASSERT_EQ(history.size(), 5u);
  EXPECT_EQ(history[0], "step,epoch,d_loss,g_loss,d_real_acc,gen_twice,restored");
  EXPECT_NE(train_out_.find("trained 4 steps"), std::string::npos) << train_out_;
  // Sample grid: 2 classes x 8 samples of 32 px.
  const RgbImage grid = read_ppm(run_dir() / "samples/eval_0001.ppm");
  EXPECT_EQ(grid.width, 8 * 32 + 9 * 2u);
  EXPECT_EQ(grid.height, 2 * 32 + 3 * 2u);
}

TEST_F(TrainedModel, GenerateGridSize) {
  const std::string words = fixture_words()[0] + "," + fixture_words()[1];
  const fs::path out = dir_->path() / "g.ppm";
  const CliResult r = cli({"generate", "--checkpoint", ckpt().string(), "--words", words, "--count", "4", "--out",
                     out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const RgbImage grid = read_ppm(out);
  EXPECT_EQ(grid.width, 138u);
  EXPECT_EQ(grid.height, 70u);
  // Same seed, same bytes.
  const fs::path again = dir_->path() / "g2.ppm";
  cli({"generate", "--checkpoint", ckpt().string(), "--words", words, "--count", "4", "--out", again.string()});
  EXPECT_EQ(emojigan::testing::read_bytes(out), emojigan::testing::read_bytes(again));
}

TEST_F(TrainedModel, GenerateRejectsZeroCountAndUnknownWord) {
  const fs::path out = dir_->path() / "none.ppm";
  CliResult r = cli({"generate", "--checkpoint", ckpt().string(), "--words", fixture_words()[0], "--count", "0", "--out",
               out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nothing to generate"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));

  r = cli({"generate", "--checkpoint", ckpt().string(), "--words", "zebra", "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("zebra"), std::string::npos);
  EXPECT_NE(r.err.find(fixture_words()[0]), std::string::npos) << "lists known words: " << r.err;
}

TEST_F(TrainedModel, BlendWritesGridAndReport) {
  const fs::path out = dir_->path() / "blend.ppm";
  const CliResult r = cli({"blend", "--checkpoint", ckpt().string(), "--word-a", fixture_words()[0], "--word-b",
                     fixture_words()[1], "--count", "3", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const RgbImage grid = read_ppm(out);
  EXPECT_EQ(grid.width, 3 * 32 + 4 * 2u);
  EXPECT_EQ(grid.height, 3 * 32 + 4 * 2u);
  const auto rows = split_lines(emojigan::testing::read_bytes(dir_->path() / "blend.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "column,d_blend_a,d_blend_b,d_a_b");
  EXPECT_EQ(rows[1].rfind("0,", 0), 0u);
}

TEST_F(TrainedModel, BlendWithItselfWarnsAndMatches) {
  const fs::path out = dir_->path() / "self.ppm", report = dir_->path() / "self_report.csv";
  const CliResult r = cli({"blend", "--checkpoint", ckpt().string(), "--word-a", fixture_words()[1], "--word-b",
                     fixture_words()[1], "--count", "2", "--out", out.string(), "--report", report.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto rows = split_lines(emojigan::testing::read_bytes(report));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], "0,0,0,0");
  EXPECT_EQ(rows[2], "1,0,0,0");
}

TEST(Cli, TrainFromManifestFiles) {
  emojigan::testing::TempDir dir("cli_manifest");
  const CliResult synth = cli({"make-synth", "--out", dir.path().string(), "--classes", "2", "--per-class", "2"});
  ASSERT_EQ(synth.code, 0) << synth.err;
  const CliResult r = cli({"train", "--manifest", (dir / "manifest.csv").string(), "--images", (dir / "images").string(),
                     "--embeddings", (dir / "embeddings.bin").string(), "--base-channels", "8", "--max-steps", "2",
                     "--batch", "2", "--out", (dir / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "final.ckpt"));
}

TEST(Cli, TrainReportsMissingManifest) {
  emojigan::testing::TempDir dir("cli_missing");
  const CliResult r = cli({"train", "--manifest", (dir / "nope.csv").string(), "--images", dir.path().string(),
                     "--embeddings", (dir / "e.bin").string(), "--out", (dir / "run").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsAreNonZero) {
  EXPECT_NE(cli({}).code, 0);
  EXPECT_NE(cli({"train", "--synthetic"}).code, 0);  // --out missing
  EXPECT_NE(cli({"train", "--synthetic", "--out", "/tmp/x", "--image-size", "48"}).code, 0);
  EXPECT_NE(cli({"bogus"}).code, 0);
  EXPECT_EQ(cli({"generate", "--checkpoint", "/nonexistent.ckpt", "--words", "a", "--out", "/tmp/x.ppm"}).code, 1);
}

TEST(Cli, MakeSynthWritesCorpusDeterministically) {
  emojigan::testing::TempDir a("synth_a"), b("synth_b");
  ASSERT_EQ(cli({"make-synth", "--out", a.path().string(), "--seed", "3"}).code, 0);
  ASSERT_EQ(cli({"make-synth", "--out", b.path().string(), "--seed", "3"}).code, 0);
  std::size_t ppms = 0;
  for (const auto& e : fs::directory_iterator(a / "images")) {
    ++ppms;
    EXPECT_EQ(emojigan::testing::read_bytes(e.path()),
              emojigan::testing::read_bytes(b / "images" / e.path().filename().string()));
  }
  EXPECT_EQ(ppms, 40u);
  const auto manifest = read_manifest(a / "manifest.csv");
  EXPECT_EQ(manifest.size(), 40u);
  EXPECT_EQ(manifest[0].word, fixture_words()[0]);
  const Corpus c = load_corpus(a / "manifest.csv", a / "images", 32);
  EXPECT_EQ(c.num_classes(), 8u);
  EXPECT_EQ(load_word2vec_binary(a / "embeddings.bin").size(), 90u);
}

TEST(Cli, GradcheckSubcommandPasses) {
  const CliResult r = cli({"gradcheck"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace emojigan
