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
#include <iosfwd>
#include <string>
#include <vector>

#include "emojigan/nn.hpp"
#include "json.hpp"

namespace emojigan {

/// Parameter file layout:
///
///   offset 0   8 bytes   magic "EMJGPAR1"
///   offset 8   8 bytes   manifest length L, little-endian uint64
///   offset 16  L bytes   JSON manifest
///                          {"header": {...},
///                           "tensors": [{"name", "shape", "offset"}, ...]}
///   offset 16+L          float32 little-endian records, back to back;
///                        "offset" is the byte offset into this blob
///
/// The manifest is serialized with sorted keys so identical parameters and
/// header always produce identical bytes.
inline constexpr char kParamMagic[9] = "EMJGPAR1";

struct StoredTensor {
  std::string name;
  Shape shape;
  std::size_t offset = 0;
  std::vector<float> values;
};

struct ParamFile {
  nlohmann::json header = nlohmann::json::object();
  std::vector<StoredTensor> tensors;

  const StoredTensor* find(const std::string& name) const;
};

void write_param_file(std::ostream& out, const ParamFile& file);
ParamFile read_param_file(std::istream& in);

void save_param_file(const std::filesystem::path& path, const ParamFile& file);
ParamFile load_param_file(const std::filesystem::path& path);

/// Snapshot of every tensor in `params`, in order.
template <class T>
ParamFile to_param_file(const ParamList<T>& params, nlohmann::json header = nlohmann::json::object());

/// Copies stored values into `params` by name. Throws ParseError on a
/// missing name or shape mismatch.
template <class T>
void assign_params(const ParamFile& file, ParamList<T>& params);

extern template ParamFile to_param_file(const ParamList<float>&, nlohmann::json);
extern template ParamFile to_param_file(const ParamList<double>&, nlohmann::json);
extern template void assign_params(const ParamFile&, ParamList<float>&);
extern template void assign_params(const ParamFile&, ParamList<double>&);

}  // namespace emojigan
