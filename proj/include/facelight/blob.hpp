// Copyright 2026 The Facelight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace facelight {

/// Versioned weight blob: `path` holds the 8-byte magic "FLBLOB01", a
/// little-endian uint64 value count and the float64 values; `path + ".json"`
/// describes named arrays as (name, offset, size) plus free-form metadata.
struct BlobArray {
  std::string name;
  Eigen::VectorXd data;
};

inline constexpr int kBlobVersion = 1;

void write_blob(const std::string& path, const std::vector<BlobArray>& arrays, const nlohmann::json& meta = {});
std::vector<BlobArray> read_blob(const std::string& path, nlohmann::json* meta = nullptr);
const BlobArray& find_array(const std::vector<BlobArray>& arrays, const std::string& name);

}  // namespace facelight
