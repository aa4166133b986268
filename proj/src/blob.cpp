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

#include "facelight/blob.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace facelight {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'B', 'L', 'O', 'B', '0', '1'};

static_assert(std::endian::native == std::endian::little, "blob IO assumes a little-endian host");

}  // namespace

void write_blob(const std::string& path, const std::vector<BlobArray>& arrays, const nlohmann::json& meta) {
  nlohmann::json side;
  side["format"] = "facelight-blob";
  side["version"] = kBlobVersion;
  side["arrays"] = nlohmann::json::array();
  std::uint64_t total = 0;
  for (const auto& a : arrays) {
    side["arrays"].push_back({{"name", a.name}, {"offset", total}, {"size", a.data.size()}});
    total += static_cast<std::uint64_t>(a.data.size());
  }
  side["meta"] = meta.is_null() ? nlohmann::json::object() : meta;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&total), sizeof(total));
  for (const auto& a : arrays) {
    out.write(reinterpret_cast<const char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
  std::ofstream js(path + ".json");
  js << side.dump(2) << '\n';
  if (!js) throw std::runtime_error("failed writing '" + path + ".json'");
}

std::vector<BlobArray> read_blob(const std::string& path, nlohmann::json* meta) {
  std::ifstream js(path + ".json");
  if (!js) throw std::runtime_error("missing blob sidecar '" + path + ".json'");
  nlohmann::json side;
  try {
    js >> side;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed blob sidecar '" + path + ".json': " + e.what());
  }
  if (side.value("format", "") != "facelight-blob" || side.value("version", 0) != kBlobVersion) {
    throw std::runtime_error("unsupported blob sidecar '" + path + ".json'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing weight blob '" + path + "'");
  char magic[8];
  std::uint64_t total = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&total), sizeof(total));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("'" + path + "' is not a weight blob");
  Eigen::VectorXd all(static_cast<Eigen::Index>(total));
  in.read(reinterpret_cast<char*>(all.data()), static_cast<std::streamsize>(total * sizeof(double)));
  if (!in) throw std::runtime_error("truncated weight blob '" + path + "'");

  std::vector<BlobArray> arrays;
  for (const auto& a : side.at("arrays")) {
    const auto offset = a.at("offset").get<std::uint64_t>();
    const auto size = a.at("size").get<std::uint64_t>();
    if (offset + size > total) throw std::runtime_error("blob sidecar array exceeds data in '" + path + "'");
    arrays.push_back({a.at("name").get<std::string>(),
                      all.segment(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(size))});
  }
  if (meta) *meta = side.value("meta", nlohmann::json::object());
  return arrays;
}

const BlobArray& find_array(const std::vector<BlobArray>& arrays, const std::string& name) {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw std::runtime_error("weight blob has no array '" + name + "'");
}

}  // namespace facelight
