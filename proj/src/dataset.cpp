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

#include "emojigan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "emojigan/error.hpp"

namespace emojigan {

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected two columns 'filename,word'");
    ManifestRow row{line.substr(0, comma), line.substr(comma + 1)};
    if (row.filename.empty() || row.word.empty())
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": empty field");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : rows) out << r.filename << ',' << r.word << '\n';
  if (!out) throw IoError("manifest: write failed");
}

Corpus load_corpus(const std::filesystem::path& manifest, const std::filesystem::path& image_dir, std::size_t size,
                   const Vocabulary* vocab) {
  const auto rows = read_manifest(manifest);
  Corpus corpus;
  corpus.image_size = size;
  std::unordered_map<std::string, std::size_t> class_of;
  for (const auto& row : rows) {
    if (vocab != nullptr && vocab->find(row.word) == nullptr)
      throw std::invalid_argument("manifest word '" + row.word + "' is not in the vocabulary");
    auto [it, inserted] = class_of.emplace(row.word, corpus.class_words.size());
    if (inserted) corpus.class_words.push_back(row.word);
    const auto path = image_dir / row.filename;
    if (!std::filesystem::exists(path)) throw IoError("manifest image not found: " + path.string());
    corpus.samples.push_back({load_image(path, size), it->second, row.word});
  }
  return corpus;
}

namespace {

struct Rgb {
  double r, g, b;
};

using Hit = std::function<bool(double, double)>;

struct Paint {
  Hit hit;
  Rgb color;
};

constexpr Rgb kBackground{240, 240, 240};
constexpr Rgb kYellow{255, 204, 77};
constexpr Rgb kDark{80, 50, 25};
constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kRedFace{232, 88, 56};
constexpr Rgb kGreenFace{150, 200, 90};
constexpr Rgb kBlueFace{130, 185, 240};
constexpr Rgb kPaleFace{205, 215, 245};
constexpr Rgb kTear{70, 140, 250};
constexpr Rgb kHeart{220, 40, 60};

constexpr double kStroke = 0.025;
constexpr double kDeg = std::numbers::pi / 180.0;

Hit disc(double cx, double cy, double r) {
  return [=](double u, double v) { return (u - cx) * (u - cx) + (v - cy) * (v - cy) <= r * r; };
}

Hit ellipse(double cx, double cy, double rx, double ry) {
  return [=](double u, double v) {
    const double a = (u - cx) / rx, b = (v - cy) / ry;
    return a * a + b * b <= 1.0;
  };
}

Hit rect(double x0, double y0, double x1, double y1) {
  return [=](double u, double v) { return u >= x0 && u <= x1 && v >= y0 && v <= y1; };
}

Hit segment(double x0, double y0, double x1, double y1, double half = kStroke) {
  return [=](double u, double v) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double t = std::clamp(((u - x0) * dx + (v - y0) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
    const double px = x0 + t * dx - u, py = y0 + t * dy - v;
    return px * px + py * py <= half * half;
  };
}

/// Circular stroke between angles a0..a1 (degrees, y axis pointing down so
/// 90 is straight below the centre).
Hit arc(double cx, double cy, double r, double a0, double a1, double half = kStroke) {
  return [=](double u, double v) {
    const double d = std::hypot(u - cx, v - cy);
    if (std::abs(d - r) > half) return false;
    double a = std::atan2(v - cy, u - cx) / kDeg;
    if (a < a0) a += 360.0;
    return a >= a0 && a <= a1;
  };
}

Hit triangle(double x0, double y0, double x1, double y1, double x2, double y2) {
  return [=](double u, double v) {
    auto side = [](double ax, double ay, double bx, double by, double px, double py) {
      return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    };
    const double s0 = side(x0, y0, x1, y1, u, v), s1 = side(x1, y1, x2, y2, u, v), s2 = side(x2, y2, x0, y0, u, v);
    return (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
  };
}

Hit lower_half_disc(double cx, double cy, double r) {
  auto d = disc(cx, cy, r);
  return [=](double u, double v) { return v >= cy && d(u, v); };
}

enum class Eyes { kDots, kWide, kHappy, kClosed, kCross, kHearts, kShades, kWink, kUneven };
enum class Mouth { kSmile, kFrown, kOpen, kTallOpen, kFlat, kLaugh, kTeeth, kSlant };

struct Recipe {
  Rgb face;
  Eyes eyes;
  Mouth mouth;
  bool brows = false;
  bool tear = false;
};

// Index = class; words are fixture_words()[0..15].
const Recipe kRecipes[kMaxSyntheticClasses] = {
    {kYellow, Eyes::kDots, Mouth::kSmile},                // smile
    {kYellow, Eyes::kDots, Mouth::kFrown},                // sad
    {kRedFace, Eyes::kDots, Mouth::kFrown, true},         // angry
    {kYellow, Eyes::kWide, Mouth::kOpen},                 // surprised
    {kYellow, Eyes::kDots, Mouth::kFlat},                 // neutral
    {kYellow, Eyes::kHappy, Mouth::kLaugh},               // laugh
    {kGreenFace, Eyes::kCross, Mouth::kSlant},            // sick
    {kBlueFace, Eyes::kDots, Mouth::kTeeth},              // cold
    {kYellow, Eyes::kWink, Mouth::kSmile},                // wink
    {kYellow, Eyes::kClosed, Mouth::kOpen},               // sleepy
    {kYellow, Eyes::kHearts, Mouth::kSmile},              // love
    {kYellow, Eyes::kShades, Mouth::kSmile},              // cool
    {kYellow, Eyes::kDots, Mouth::kFrown, false, true},   // cry
    {kPaleFace, Eyes::kWide, Mouth::kTallOpen},           // scream
    {kYellow, Eyes::kDots, Mouth::kTeeth},                // grin
    {kYellow, Eyes::kUneven, Mouth::kSlant},              // confused
};

void add_eye(std::vector<Paint>& scene, Eyes style, double ex, double ey, bool right) {
  switch (style) {
    case Eyes::kDots:
      scene.push_back({disc(ex, ey, 0.05), kDark});
      break;
    case Eyes::kWide:
      scene.push_back({ellipse(ex, ey, 0.075, 0.095), kWhite});
      scene.push_back({disc(ex, ey + 0.015, 0.04), kDark});
      break;
    case Eyes::kHappy:
      scene.push_back({arc(ex, ey + 0.035, 0.06, 200, 340, 0.022), kDark});
      break;
    case Eyes::kClosed:
      scene.push_back({segment(ex - 0.065, ey, ex + 0.065, ey, 0.02), kDark});
      break;
    case Eyes::kCross:
      scene.push_back({segment(ex - 0.05, ey - 0.05, ex + 0.05, ey + 0.05, 0.02), kDark});
      scene.push_back({segment(ex - 0.05, ey + 0.05, ex + 0.05, ey - 0.05, 0.02), kDark});
      break;
    case Eyes::kHearts:
      scene.push_back({disc(ex - 0.033, ey - 0.012, 0.037), kHeart});
      scene.push_back({disc(ex + 0.033, ey - 0.012, 0.037), kHeart});
      scene.push_back({triangle(ex - 0.068, ey, ex + 0.068, ey, ex, ey + 0.075), kHeart});
      break;
    case Eyes::kShades:
      scene.push_back({ellipse(ex, ey, 0.095, 0.065), kDark});
      break;
    case Eyes::kWink:
      if (right)
        scene.push_back({segment(ex - 0.065, ey, ex + 0.065, ey, 0.02), kDark});
      else
        scene.push_back({disc(ex, ey, 0.05), kDark});
      break;
    case Eyes::kUneven:
      scene.push_back({disc(ex, ey, right ? 0.032 : 0.058), kDark});
      break;
  }
}

void add_mouth(std::vector<Paint>& scene, Mouth style, double mx, double my) {
  switch (style) {
    case Mouth::kSmile:
      scene.push_back({arc(mx, my - 0.09, 0.16, 25, 155), kDark});
      break;
    case Mouth::kFrown:
      scene.push_back({arc(mx, my + 0.12, 0.14, 215, 325), kDark});
      break;
    case Mouth::kOpen:
      scene.push_back({ellipse(mx, my + 0.02, 0.07, 0.085), kDark});
      break;
    case Mouth::kTallOpen:
      scene.push_back({ellipse(mx, my + 0.02, 0.075, 0.13), kDark});
      break;
    case Mouth::kFlat:
      scene.push_back({segment(mx - 0.12, my, mx + 0.12, my), kDark});
      break;
    case Mouth::kLaugh:
      scene.push_back({lower_half_disc(mx, my - 0.04, 0.17), kDark});
      break;
    case Mouth::kTeeth:
      scene.push_back({rect(mx - 0.17, my - 0.06, mx + 0.17, my + 0.06), kDark});
      scene.push_back({rect(mx - 0.14, my - 0.035, mx + 0.14, my + 0.035), kWhite});
      break;
    case Mouth::kSlant:
      scene.push_back({segment(mx - 0.12, my + 0.035, mx + 0.12, my - 0.035), kDark});
      break;
  }
}

}  // namespace

RgbImage render_synthetic_emoji(std::size_t cls, std::size_t size, Rng& rng) {
  if (cls >= kMaxSyntheticClasses)
    throw std::invalid_argument("synthetic emoji class " + std::to_string(cls) + " out of range");
  const Recipe& recipe = kRecipes[cls];
  const double cx = 0.5 + rng.uniform(-0.02, 0.02);
  const double cy = 0.5 + rng.uniform(-0.02, 0.02);
  const double radius = 0.42 + rng.uniform(-0.01, 0.01);
  const double feature_dy = rng.uniform(-0.015, 0.015);
  const double bright = rng.uniform(-6.0, 6.0);

  Rgb face = recipe.face;
  face.r = std::clamp(face.r + bright, 0.0, 255.0);
  face.g = std::clamp(face.g + bright, 0.0, 255.0);
  face.b = std::clamp(face.b + bright, 0.0, 255.0);

  std::vector<Paint> scene;
  scene.push_back({disc(cx, cy, radius), face});
  const double ey = cy - 0.08 + feature_dy;
  if (recipe.brows) {
    scene.push_back({segment(cx - 0.24, ey - 0.13, cx - 0.08, ey - 0.07, 0.022), kDark});
    scene.push_back({segment(cx + 0.24, ey - 0.13, cx + 0.08, ey - 0.07, 0.022), kDark});
  }
  add_eye(scene, recipe.eyes, cx - 0.15, ey, false);
  add_eye(scene, recipe.eyes, cx + 0.15, ey, true);
  if (recipe.eyes == Eyes::kShades) scene.push_back({rect(cx - 0.06, ey - 0.018, cx + 0.06, ey + 0.005), kDark});
  if (recipe.tear) scene.push_back({ellipse(cx - 0.15, ey + 0.11, 0.032, 0.05), kTear});
  add_mouth(scene, recipe.mouth, cx, cy + 0.15 + feature_dy);

  constexpr int kSub = 4;
  RgbImage image(size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      double acc[3] = {0, 0, 0};
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx) {
          const double u = (static_cast<double>(x) + (sx + 0.5) / kSub) / static_cast<double>(size);
          const double v = (static_cast<double>(y) + (sy + 0.5) / kSub) / static_cast<double>(size);
          Rgb c = kBackground;
          for (const auto& p : scene)
            if (p.hit(u, v)) c = p.color;
          acc[0] += c.r;
          acc[1] += c.g;
          acc[2] += c.b;
        }
      for (int k = 0; k < 3; ++k)
        image.at(x, y)[k] = static_cast<std::uint8_t>(std::lround(acc[k] / (kSub * kSub)));
    }
  }
  return image;
}

Corpus make_synthetic_corpus(std::size_t num_classes, std::size_t per_class, std::size_t size, Rng& rng) {
  if (num_classes == 0 || num_classes > kMaxSyntheticClasses)
    throw std::invalid_argument("synthetic corpus supports 1.." + std::to_string(kMaxSyntheticClasses) +
                                " classes, got " + std::to_string(num_classes));
  Corpus corpus;
  corpus.image_size = size;
  const auto& words = fixture_words();
  for (std::size_t c = 0; c < num_classes; ++c) corpus.class_words.push_back(words[c]);
  for (std::size_t c = 0; c < num_classes; ++c)
    for (std::size_t k = 0; k < per_class; ++k)
      corpus.samples.push_back({image_to_tensor(render_synthetic_emoji(c, size, rng)), c, words[c]});
  return corpus;
}

Tensor<float> class_embeddings(const Corpus& corpus, const Vocabulary& vocab, bool normalize) {
  const std::size_t dim = vocab.dim();
  Tensor<float> table({std::max<std::size_t>(corpus.num_classes(), 1), dim});
  for (std::size_t c = 0; c < corpus.num_classes(); ++c) {
    const WordEmbedding* e = vocab.find(corpus.class_words[c]);
    if (e == nullptr) throw std::invalid_argument("word '" + corpus.class_words[c] + "' is not in the vocabulary");
    const Tensor<float> v = normalize ? unit_normalized(e->vector) : e->vector;
    std::copy(v.data().begin(), v.data().end(), table.data().begin() + c * dim);
  }
  return table;
}

BatchSampler::BatchSampler(const Corpus& corpus, Tensor<float> embeddings, std::size_t batch_size, Rng rng)
    : corpus_(&corpus), embeddings_(std::move(embeddings)), batch_size_(batch_size), rng_(rng) {
  if (batch_size_ == 0) throw std::invalid_argument("batch size must be positive");
  if (corpus.size() == 0) throw std::invalid_argument("empty corpus");
  if (batch_size_ > corpus.size())
    throw std::invalid_argument("batch size " + std::to_string(batch_size_) + " exceeds corpus size " +
                                std::to_string(corpus.size()));
  if (corpus.num_classes() < 2) throw std::invalid_argument("mismatched pairs need at least 2 classes");
  if (embeddings_.rank() != 2 || embeddings_.dim(0) != corpus.num_classes())
    throw DimensionError("embedding table " + shape_str(embeddings_.shape()) + " does not cover " +
                         std::to_string(corpus.num_classes()) + " classes");
}

BatchSampler::BatchSampler(const Corpus& corpus, const Vocabulary& vocab, std::size_t batch_size, Rng rng,
                           bool normalize)
    : BatchSampler(corpus, class_embeddings(corpus, vocab, normalize), batch_size, rng) {}

void BatchSampler::start_epoch() {
  order_.resize(corpus_->size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.uniform_index(i)]);
  cursor_ = 0;
  ++epochs_started_;
}

Batch BatchSampler::next() {
  if (epochs_started_ == 0 || cursor_ >= order_.size()) start_epoch();
  const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
  const std::size_t size = corpus_->image_size, dim = embeddings_.dim(1), classes = corpus_->num_classes();
  const std::size_t img = 3 * size * size;

  Batch batch;
  batch.images = Tensor<float>({n, 3, size, size});
  batch.true_embeddings = Tensor<float>({n, dim});
  batch.mismatched_embeddings = Tensor<float>({n, dim});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = order_[cursor_ + i];
    const ImageSample& s = corpus_->samples[idx];
    if (s.pixels.numel() != img)
      throw DimensionError("sample " + std::to_string(idx) + " has shape " + shape_str(s.pixels.shape()));
    std::copy(s.pixels.data().begin(), s.pixels.data().end(), batch.images.data().begin() + i * img);
    std::size_t wrong = rng_.uniform_index(classes - 1);
    if (wrong >= s.label) ++wrong;
    const auto row = [&](std::size_t c) { return embeddings_.data().subspan(c * dim, dim); };
    std::copy(row(s.label).begin(), row(s.label).end(), batch.true_embeddings.data().begin() + i * dim);
    std::copy(row(wrong).begin(), row(wrong).end(), batch.mismatched_embeddings.data().begin() + i * dim);
    batch.labels.push_back(s.label);
    batch.mismatched_labels.push_back(wrong);
    batch.indices.push_back(idx);
  }
  cursor_ += n;
  return batch;
}

std::vector<Batch> BatchSampler::epoch() {
  if (epochs_started_ == 0 || cursor_ >= order_.size()) start_epoch();
  std::vector<Batch> out;
  while (cursor_ < order_.size()) out.push_back(next());
  return out;
}

}  // namespace emojigan
