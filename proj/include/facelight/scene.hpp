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

#include "facelight/render.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace facelight {

/// Raised for scene, light or config documents that violate the schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSceneVersion = 1;

struct SceneLoadOptions {
  /// Reject unknown keys.
  bool strict = true;
};

/// Parses a scene document. Relative paths (weights, images) resolve against
/// `base_dir`. Networks without a weight blob are initialized from the seed.
Scene scene_from_json(const nlohmann::json& doc, const std::string& base_dir, const SceneLoadOptions& options = {});
Scene load_scene(const std::string& path, const SceneLoadOptions& options = {});

/// Serializes the scene; `weights` names the blob written next to it when the
/// scene has network parameters.
nlohmann::json scene_to_json(const Scene& scene, const std::string& weights = "");
/// Writes the JSON document and, if needed, `<stem>.bin` beside it.
void save_scene(const Scene& scene, const std::string& path);

nlohmann::json light_to_json(const SHLight& light);
SHLight light_from_json(const nlohmann::json& doc);
SHLight load_light(const std::string& path);
void save_light(const SHLight& light, const std::string& path);

nlohmann::json load_json(const std::string& path);

/// Directory part of a path ("." when there is none).
std::string parent_dir(const std::string& path);
/// Joins `path` to `base` unless it is absolute.
std::string resolve_path(const std::string& base, const std::string& path);

/// Throws SchemaError if `obj` has a key outside `allowed` (strict mode only).
void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                bool strict);

}  // namespace facelight
