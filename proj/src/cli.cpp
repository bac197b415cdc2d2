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

#include "emojigan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "emojigan/dataset.hpp"
#include "emojigan/embeddings.hpp"
#include "emojigan/gan.hpp"
#include "emojigan/gradcheck_suite.hpp"
#include "emojigan/image.hpp"
#include "emojigan/trainer.hpp"

namespace emojigan {

namespace fs = std::filesystem;

namespace {

/// Thrown for bad flags or inputs detected before any work starts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainFlags {
  std::string manifest, images, embeddings, out;
  bool synthetic = false;
  std::size_t classes = 8, per_class = 5;
  std::size_t epochs = 1000, max_steps = 0, batch = 16, image_size = 32;
  std::size_t base_channels = 256, eval_every = 50, patience = 10;
  double lr = 2e-4, gen_twice_threshold = 0.3, mismatch_weight = 1.0 / 3.0;
  std::uint64_t seed = 0;
  bool normalize_embeddings = false, literal_minimax = false;
};

struct GenerateFlags {
  std::string checkpoint, out;
  std::vector<std::string> words;
  std::size_t count = 4;
  std::uint64_t seed = 0;
};

struct BlendFlags {
  std::string checkpoint, word_a, word_b, out, report;
  std::size_t count = 4;
  std::uint64_t seed = 0;
};

struct SynthFlags {
  std::string out;
  std::size_t classes = 8, per_class = 5, image_size = 32;
  std::uint64_t seed = 0;
};

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw UsageError(std::string(flag) + ": no such file: " + path);
}

Corpus synthetic_corpus(std::size_t classes, std::size_t per_class, std::size_t size, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("corpus");
  return make_synthetic_corpus(classes, per_class, size, rng);
}

/// Copies row `row` of a [n, ...] tensor into a fresh tensor of the row shape.
Tensor<float> row_of(const Tensor<float>& batch, std::size_t row) {
  Shape cell(batch.shape().begin() + 1, batch.shape().end());
  const std::size_t numel = shape_numel(cell);
  auto src = batch.data().subspan(row * numel, numel);
  return Tensor<float>(cell, std::vector<float>(src.begin(), src.end()));
}

Tensor<float> repeat_rows(const Tensor<float>& v, std::size_t n) {
  const std::size_t dim = v.numel();
  Tensor<float> t({n, dim});
  for (std::size_t r = 0; r < n; ++r) std::copy(v.data().begin(), v.data().end(), t.data().begin() + r * dim);
  return t;
}

std::vector<Tensor<float>> generate_row(GeneratorNet<float>& g, const Tensor<float>& z, const Tensor<float>& t) {
  NoGradScope<float> no_grad;
  const Tensor<float> images = generate(g, z, repeat_rows(t, z.dim(0)));
  std::vector<Tensor<float>> row;
  for (std::size_t c = 0; c < images.dim(0); ++c) row.push_back(row_of(images, c));
  return row;
}

double mean_l1(const Tensor<float>& a, const Tensor<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
  return s / static_cast<double>(a.numel());
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  if (f.out.empty()) throw UsageError("--out is required");
  Corpus corpus;
  Vocabulary vocab;
  if (f.synthetic) {
    if (!f.manifest.empty() || !f.embeddings.empty())
      throw UsageError("--synthetic cannot be combined with --manifest/--embeddings");
    if (f.classes < 2 || f.classes > kMaxSyntheticClasses)
      throw UsageError("--classes must be in [2, " + std::to_string(kMaxSyntheticClasses) + "]");
    if (f.per_class == 0) throw UsageError("--per-class must be positive");
    corpus = synthetic_corpus(f.classes, f.per_class, f.image_size, f.seed);
    vocab = make_fixture_vocabulary();
  } else {
    require_file(f.manifest, "--manifest");
    require_file(f.embeddings, "--embeddings");
    if (f.images.empty()) throw UsageError("--images is required");
    if (!fs::is_directory(f.images)) throw UsageError("--images: no such directory: " + f.images);
    AllowList allow;
    for (const auto& row : read_manifest(f.manifest)) allow.insert(row.word);
    vocab = load_word2vec_binary(f.embeddings, &allow);
    corpus = load_corpus(f.manifest, f.images, f.image_size, &vocab);
  }

  ArchConfig arch;
  arch.embed_dim = vocab.dim();
  arch.image_size = f.image_size;
  arch.base_channels = f.base_channels;

  TrainConfig config;
  config.lr = f.lr;
  config.batch_size = f.batch;
  config.max_epochs = f.epochs;
  config.max_steps = f.max_steps;
  config.seed = f.seed;
  config.gen_twice_threshold = f.gen_twice_threshold;
  config.eval_every = f.eval_every;
  config.patience = f.patience;
  config.literal_minimax = f.literal_minimax;
  if (!(f.mismatch_weight >= 0 && f.mismatch_weight < 1)) throw UsageError("--mismatch-weight must be in [0, 1)");
  const double rest = (1.0 - f.mismatch_weight) / 2.0;
  config.weights = {rest, f.mismatch_weight, rest};

  const Tensor<float> table = class_embeddings(corpus, vocab, f.normalize_embeddings);
  Trainer trainer(corpus, table, arch, config);

  const fs::path out_dir = f.out;
  fs::create_directories(out_dir / "samples");
  TrainHooks hooks;
  hooks.on_eval = [&](const EvalRecord& rec, GeneratorNet<float>& g, DiscriminatorNet<float>&, const TrainState&) {
    Rng rng = Rng(f.seed).substream("samples");
    const Tensor<float> z = sample_noise(8, arch.noise_dim, rng);
    std::vector<std::vector<Tensor<float>>> rows;
    for (std::size_t c = 0; c < corpus.num_classes(); ++c) rows.push_back(generate_row(g, z, row_of(table, c)));
    char name[32];
    std::snprintf(name, sizeof name, "eval_%04zu.ppm", rec.eval);
    write_ppm(out_dir / "samples" / name, make_grid(rows));
    out << "eval " << rec.eval << " epoch " << rec.epoch << " step " << rec.step << " score " << fmt9(rec.score)
        << " mean_l1 " << fmt9(rec.mean_l1) << " class_matches " << rec.class_matches << '/' << corpus.num_classes()
        << (rec.improved ? " best" : "") << (rec.restored ? " restored" : "") << '\n';
  };
  const TrainResult result = trainer.run(out_dir, hooks);
  out << "trained " << result.steps << " steps over " << result.epochs << " epochs"
      << (result.early_stopped ? " (early stop)" : "") << "; best score " << fmt9(result.best_score) << "; wrote "
      << (out_dir / "best.ckpt").string() << '\n';
  return 0;
}

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  if (f.count == 0) throw UsageError("nothing to generate: --count is 0");
  if (f.words.empty()) throw UsageError("--words is required");
  if (f.out.empty()) throw UsageError("--out is required");
  require_file(f.checkpoint, "--checkpoint");
  Model model = load_checkpoint(f.checkpoint);
  std::vector<Tensor<float>> vectors;
  for (const auto& w : f.words) {
    try {
      vectors.push_back(model.embedding_of(w));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  Rng rng = Rng(f.seed).substream("generate");
  const Tensor<float> z = sample_noise(f.count, model.arch.noise_dim, rng);
  std::vector<std::vector<Tensor<float>>> rows;
  for (const auto& v : vectors) rows.push_back(generate_row(model.generator, z, v));
  const RgbImage grid = make_grid(rows);
  write_ppm(fs::path(f.out), grid);
  out << "wrote " << f.out << " (" << grid.width << "x" << grid.height << ", " << rows.size() << " rows x " << f.count
      << " samples)\n";
  return 0;
}

int cmd_blend(const BlendFlags& f, std::ostream& out, std::ostream& err) {
  if (f.count == 0) throw UsageError("nothing to generate: --count is 0");
  if (f.out.empty()) throw UsageError("--out is required");
  require_file(f.checkpoint, "--checkpoint");
  Model model = load_checkpoint(f.checkpoint);
  Tensor<float> a, b;
  try {
    a = model.embedding_of(f.word_a);
    b = model.embedding_of(f.word_b);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (f.word_a == f.word_b) err << "warning: blending '" << f.word_a << "' with itself; the middle row equals both\n";
  const Tensor<float> mid = average_vectors(a, b);

  Rng rng = Rng(f.seed).substream("blend");
  const Tensor<float> z = sample_noise(f.count, model.arch.noise_dim, rng);
  std::vector<std::vector<Tensor<float>>> rows{generate_row(model.generator, z, a),
                                               generate_row(model.generator, z, mid),
                                               generate_row(model.generator, z, b)};
  write_ppm(fs::path(f.out), make_grid(rows));

  const fs::path report = f.report.empty() ? fs::path(f.out).replace_extension(".csv") : fs::path(f.report);
  std::ofstream csv(report, std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot open " + report.string() + " for writing");
  csv << "column,d_blend_a,d_blend_b,d_a_b\n";
  for (std::size_t c = 0; c < f.count; ++c)
    csv << c << ',' << fmt9(mean_l1(rows[1][c], rows[0][c])) << ',' << fmt9(mean_l1(rows[1][c], rows[2][c])) << ','
        << fmt9(mean_l1(rows[0][c], rows[2][c])) << '\n';
  if (!csv) throw IoError("write failed: " + report.string());
  out << "wrote " << f.out << " and " << report.string() << '\n';
  return 0;
}

int cmd_make_synth(const SynthFlags& f, std::ostream& out) {
  if (f.out.empty()) throw UsageError("--out is required");
  if (f.classes < 2 || f.classes > kMaxSyntheticClasses)
    throw UsageError("--classes must be in [2, " + std::to_string(kMaxSyntheticClasses) + "]");
  if (f.per_class == 0) throw UsageError("--per-class must be positive");
  const Corpus corpus = synthetic_corpus(f.classes, f.per_class, f.image_size, f.seed);
  const fs::path dir = f.out;
  fs::create_directories(dir / "images");
  std::vector<ManifestRow> rows;
  std::vector<std::size_t> seen(corpus.num_classes(), 0);
  for (const auto& s : corpus.samples) {
    char name[96];
    std::snprintf(name, sizeof name, "%s_%03zu.ppm", s.word.c_str(), seen[s.label]++);
    write_ppm(dir / "images" / name, tensor_to_image(s.pixels));
    rows.push_back({name, s.word});
  }
  write_manifest(dir / "manifest.csv", rows);
  save_word2vec_binary(dir / "embeddings.bin", make_fixture_vocabulary());
  out << "wrote " << rows.size() << " images, " << (dir / "manifest.csv").string() << " and "
      << (dir / "embeddings.bin").string() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-vector conditioned emoji GAN"};
  app.name("emojigan");
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a conditional GAN on a labeled image corpus");
  train->add_option("--manifest", tf.manifest, "CSV of filename,word rows");
  train->add_option("--images", tf.images, "Directory holding the manifest's PPM images");
  train->add_option("--embeddings", tf.embeddings, "word2vec binary embeddings file");
  train->add_flag("--synthetic", tf.synthetic, "Train on the built-in procedural emoji corpus");
  train->add_option("--classes", tf.classes, "Synthetic classes")->capture_default_str();
  train->add_option("--per-class", tf.per_class, "Synthetic images per class")->capture_default_str();
  train->add_option("--epochs", tf.epochs, "Maximum epochs")->capture_default_str();
  train->add_option("--max-steps", tf.max_steps, "Maximum steps (0: unlimited)")->capture_default_str();
  train->add_option("--batch", tf.batch, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--lr", tf.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", tf.seed, "Random seed")->capture_default_str();
  train->add_option("--out", tf.out, "Output directory")->required();
  train->add_option("--image-size", tf.image_size, "Image size")->capture_default_str()->check(CLI::IsMember({32, 64}));
  train->add_flag("--normalize-embeddings", tf.normalize_embeddings, "Unit-normalize conditioning vectors");
  train->add_flag("--literal-minimax", tf.literal_minimax, "Use the saturating generator loss log(1 - D(G(z)))");
  train->add_option("--gen-twice-threshold", tf.gen_twice_threshold,
                    "Run a second generator step when the discriminator loss is below this")
      ->capture_default_str();
  train->add_option("--base-channels", tf.base_channels, "Widest layer's channel count")->capture_default_str();
  train->add_option("--eval-every", tf.eval_every, "Epochs between evaluations")->capture_default_str();
  train->add_option("--patience", tf.patience, "Evaluations without improvement before stopping")
      ->capture_default_str();
  train->add_option("--mismatch-weight", tf.mismatch_weight,
                    "Weight of the (real image, mismatched word) term; the other two share the rest")
      ->capture_default_str();

  GenerateFlags gf;
  auto* gen = app.add_subcommand("generate", "Generate a grid of emojis, one row per word");
  gen->add_option("--checkpoint", gf.checkpoint, "Checkpoint file")->required();
  gen->add_option("--words", gf.words, "Words to condition on (comma separated)")->delimiter(',')->required();
  gen->add_option("--count", gf.count, "Samples per word")->capture_default_str();
  gen->add_option("--seed", gf.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gf.out, "Output PPM path")->required();

  BlendFlags bf;
  auto* blend = app.add_subcommand("blend", "Generate from the average of two word vectors");
  blend->add_option("--checkpoint", bf.checkpoint, "Checkpoint file")->required();
  blend->add_option("--word-a", bf.word_a, "First word")->required();
  blend->add_option("--word-b", bf.word_b, "Second word")->required();
  blend->add_option("--count", bf.count, "Columns")->capture_default_str();
  blend->add_option("--seed", bf.seed, "Random seed")->capture_default_str();
  blend->add_option("--out", bf.out, "Output PPM path")->required();
  blend->add_option("--report", bf.report, "Distance CSV path (default: --out with .csv)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Run the finite-difference gradient suite");

  SynthFlags sf;
  auto* synth = app.add_subcommand("make-synth", "Write the procedural emoji corpus to disk");
  synth->add_option("--out", sf.out, "Output directory")->required();
  synth->add_option("--classes", sf.classes, "Classes")->capture_default_str();
  synth->add_option("--per-class", sf.per_class, "Images per class")->capture_default_str();
  synth->add_option("--seed", sf.seed, "Random seed")->capture_default_str();
  synth->add_option("--image-size", sf.image_size, "Image size")->capture_default_str()->check(CLI::IsMember({32, 64}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) return cmd_train(tf, out);
    if (*gen) return cmd_generate(gf, out);
    if (*blend) return cmd_blend(bf, out, err);
    if (*gradcheck) return run_gradcheck_suite(default_gradcheck_cases(), out);
    if (*synth) return cmd_make_synth(sf, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace emojigan
