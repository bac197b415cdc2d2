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

#include "emojigan/params.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "emojigan/error.hpp"

namespace emojigan {

namespace {

static_assert(sizeof(float) == 4);

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("parameter file: truncated length field");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

float from_le_bytes(const unsigned char* b) {
  const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                             (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

const StoredTensor* ParamFile::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void write_param_file(std::ostream& out, const ParamFile& file) {
  nlohmann::json manifest;
  manifest["header"] = file.header;
  manifest["tensors"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : file.tensors) {
    if (shape_numel(t.shape) != t.values.size())
      throw DimensionError("parameter file: tensor " + t.name + " has " + std::to_string(t.values.size()) +
                           " values for shape " + shape_str(t.shape));
    manifest["tensors"].push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += 4 * t.values.size();
  }
  const std::string text = manifest.dump();
  out.write(kParamMagic, 8);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : file.tensors)
    for (float v : t.values) put_f32(out, v);
  if (!out) throw IoError("parameter file: write failed");
}

ParamFile read_param_file(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kParamMagic, 8) != 0)
    throw ParseError("parameter file: bad magic");
  const std::uint64_t len = get_u64(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw ParseError("parameter file: truncated manifest");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("parameter file: invalid manifest: ") + e.what());
  }
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  ParamFile file;
  file.header = manifest.value("header", nlohmann::json::object());
  try {
    for (const auto& entry : manifest.at("tensors")) {
      StoredTensor t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<Shape>();
      t.offset = entry.at("offset").get<std::size_t>();
      const std::size_t count = shape_numel(t.shape);
      if (t.offset + 4 * count > blob.size())
        throw ParseError("parameter file: tensor " + t.name + " extends past end of data (offset " +
                         std::to_string(t.offset) + ")");
      t.values.resize(count);
      for (std::size_t i = 0; i < count; ++i) t.values[i] = from_le_bytes(blob.data() + t.offset + 4 * i);
      file.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("parameter file: malformed tensor entry: ") + e.what());
  }
  return file;
}

void save_param_file(const std::filesystem::path& path, const ParamFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_param_file(out, file);
}

ParamFile load_param_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_param_file(in);
}

template <class T>
ParamFile to_param_file(const ParamList<T>& params, nlohmann::json header) {
  ParamFile file;
  file.header = std::move(header);
  std::size_t offset = 0;
  for (const auto& p : params) {
    StoredTensor t{p.name, p.tensor.shape(), offset, {}};
    t.values.reserve(p.tensor.numel());
    for (T v : p.tensor.data()) t.values.push_back(static_cast<float>(v));
    offset += 4 * t.values.size();
    file.tensors.push_back(std::move(t));
  }
  return file;
}

template <class T>
void assign_params(const ParamFile& file, ParamList<T>& params) {
  for (auto& p : params) {
    const StoredTensor* t = file.find(p.name);
    if (t == nullptr) throw ParseError("parameter file: missing tensor " + p.name);
    if (t->shape != p.tensor.shape())
      throw ParseError("parameter file: tensor " + p.name + " has shape " + shape_str(t->shape) + ", expected " +
                       shape_str(p.tensor.shape()));
    auto dst = p.tensor.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(t->values[i]);
  }
}

template ParamFile to_param_file(const ParamList<float>&, nlohmann::json);
template ParamFile to_param_file(const ParamList<double>&, nlohmann::json);
template void assign_params(const ParamFile&, ParamList<float>&);
template void assign_params(const ParamFile&, ParamList<double>&);

}  // namespace emojigan
