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

#include "facelight/param_tape.hpp"

#include "facelight/core.hpp"

namespace facelight {

ParamSlice ParamTape::allocate(const std::string& group, Eigen::Index size) {
  if (size < 0) throw DomainError("ParamTape::allocate: negative size");
  const int g = group_id(group);
  ParamSlice s{values_.size(), size};
  values_.conservativeResize(values_.size() + size);
  grads_.conservativeResize(grads_.size() + size);
  values_.tail(size).setZero();
  grads_.tail(size).setZero();
  segments_.push_back({s, g});
  return s;
}

int ParamTape::group_id(const std::string& name) {
  const int found = find_group(name);
  if (found >= 0) return found;
  groups_.push_back({name, 1.0});
  return static_cast<int>(groups_.size()) - 1;
}

int ParamTape::find_group(const std::string& name) const {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void ParamTape::set_lr_multiplier(const std::string& group, double multiplier) {
  groups_[group_id(group)].lr_multiplier = multiplier;
}

Eigen::VectorXd ParamTape::lr_multipliers() const {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(values_.size());
  for (const auto& seg : segments_) m.segment(seg.slice.offset, seg.slice.size).setConstant(groups_[seg.group].lr_multiplier);
  return m;
}

Eigen::Index ParamTape::group_size(const std::string& name) const {
  const int g = find_group(name);
  Eigen::Index n = 0;
  for (const auto& seg : segments_) {
    if (seg.group == g) n += seg.slice.size;
  }
  return n;
}

std::string ParamTape::describe(Eigen::Index index) const {
  for (const auto& seg : segments_) {
    if (index >= seg.slice.offset && index < seg.slice.offset + seg.slice.size) {
      return groups_[seg.group].name + "[" + std::to_string(index - seg.slice.offset) + "]";
    }
  }
  return "param[" + std::to_string(index) + "]";
}

}  // namespace facelight
