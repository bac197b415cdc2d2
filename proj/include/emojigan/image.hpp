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
#include <vector>

#include "emojigan/tensor.hpp"

namespace emojigan {

/// 8-bit RGB raster, row-major, channels interleaved.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(3 * w * h, 0) {}

  std::uint8_t* at(std::size_t x, std::size_t y) { return pixels.data() + 3 * (y * width + x); }
  const std::uint8_t* at(std::size_t x, std::size_t y) const { return pixels.data() + 3 * (y * width + x); }

  bool operator==(const RgbImage&) const = default;
};

/// Binary PPM (P6) with maxval 255. Comments ('#' to end of line) are
/// accepted in the header.
RgbImage read_ppm(std::istream& in);
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(std::ostream& out, const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// Nearest neighbour: destination (x, y) samples source
/// (floor(x * src_w / dst_w), floor(y * src_h / dst_h)).
RgbImage resize_nearest(const RgbImage& image, std::size_t width, std::size_t height);

/// u8 -> [3,H,W] float via v / 127.5 - 1.
Tensor<float> image_to_tensor(const RgbImage& image);
/// [3,H,W] in [-1,1] -> u8 via round((v + 1) * 127.5), clamped.
RgbImage tensor_to_image(const Tensor<float>& chw);

/// Reads a PPM and resizes it to size x size.
Tensor<float> load_image(const std::filesystem::path& path, std::size_t size);

/// Tiles equally sized [3,S,S] tensors into a grid; rows[r][c] is the cell
/// at row r, column c. Cells are separated and framed by `gutter` black
/// pixels, so the grid is (cols*S + (cols+1)*gutter) x (rows*S + (rows+1)*gutter).
RgbImage make_grid(const std::vector<std::vector<Tensor<float>>>& rows, std::size_t gutter = 2);

}  // namespace emojigan
