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

#include "emojigan/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "emojigan/error.hpp"

namespace emojigan {

namespace {

/// Skips whitespace and '#' comments, then reads a decimal integer.
std::size_t read_header_int(std::istream& in, const char* field) {
  int ch = in.peek();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
    ch = in.peek();
  }
  if (ch == EOF || !std::isdigit(ch)) throw ParseError(std::string("ppm: missing ") + field);
  std::size_t value = 0;
  while (std::isdigit(in.peek())) {
    value = value * 10 + static_cast<std::size_t>(in.get() - '0');
    if (value > (1u << 24)) throw ParseError(std::string("ppm: ") + field + " too large");
  }
  return value;
}

}  // namespace

RgbImage read_ppm(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '6') throw ParseError("ppm: bad magic, expected P6");
  const std::size_t width = read_header_int(in, "width");
  const std::size_t height = read_header_int(in, "height");
  const std::size_t maxval = read_header_int(in, "maxval");
  if (width == 0 || height == 0) throw ParseError("ppm: zero image dimension");
  if (maxval != 255) throw ParseError("ppm: bad maxval " + std::to_string(maxval) + ", expected 255");
  if (!std::isspace(in.get())) throw ParseError("ppm: missing whitespace after header");
  RgbImage image(width, height);
  in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != image.pixels.size())
    throw ParseError("ppm: truncated pixel data, expected " + std::to_string(image.pixels.size()) + " bytes, got " +
                     std::to_string(in.gcount()));
  return image;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  try {
    return read_ppm(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_ppm(std::ostream& out, const RgbImage& image) {
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("ppm: write failed");
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_ppm(out, image);
}

RgbImage resize_nearest(const RgbImage& image, std::size_t width, std::size_t height) {
  if (width == image.width && height == image.height) return image;
  RgbImage out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = y * image.height / height;
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = x * image.width / width;
      std::copy_n(image.at(sx, sy), 3, out.at(x, y));
    }
  }
  return out;
}

Tensor<float> image_to_tensor(const RgbImage& image) {
  const std::size_t plane = image.width * image.height;
  Tensor<float> t({3, image.height, image.width});
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) t[c * plane + i] = static_cast<float>(image.pixels[3 * i + c]) / 127.5f - 1.0f;
  return t;
}

RgbImage tensor_to_image(const Tensor<float>& chw) {
  if (chw.rank() != 3 || chw.dim(0) != 3)
    throw DimensionError("tensor_to_image: expected [3,H,W], got " + shape_str(chw.shape()));
  const std::size_t h = chw.dim(1), w = chw.dim(2), plane = h * w;
  RgbImage image(w, h);
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = std::round((chw[c * plane + i] + 1.0f) * 127.5f);
      image.pixels[3 * i + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0f, 255.0f));
    }
  return image;
}

Tensor<float> load_image(const std::filesystem::path& path, std::size_t size) {
  return image_to_tensor(resize_nearest(read_ppm(path), size, size));
}

RgbImage make_grid(const std::vector<std::vector<Tensor<float>>>& rows, std::size_t gutter) {
  if (rows.empty() || rows.front().empty()) throw DimensionError("make_grid: empty grid");
  const std::size_t cols = rows.front().size();
  const Shape cell = rows.front().front().shape();
  if (cell.size() != 3 || cell[0] != 3) throw DimensionError("make_grid: cells must be [3,H,W]");
  const std::size_t ch = cell[1], cw = cell[2];
  RgbImage grid(cols * cw + (cols + 1) * gutter, rows.size() * ch + (rows.size() + 1) * gutter);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw DimensionError("make_grid: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (rows[r][c].shape() != cell) throw DimensionError("make_grid: cells differ in shape");
      const RgbImage tile = tensor_to_image(rows[r][c]);
      const std::size_t x0 = gutter + c * (cw + gutter), y0 = gutter + r * (ch + gutter);
      for (std::size_t y = 0; y < ch; ++y) std::copy_n(tile.at(0, y), 3 * cw, grid.at(x0, y0 + y));
    }
  }
  return grid;
}

}  // namespace emojigan
