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

#include <string>
#include <vector>

namespace facelight {

/// Contiguous range of a ParamTape.
struct ParamSlice {
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

struct ParamGroup {
  std::string name;
  double lr_multiplier = 1.0;
};

/// Flat store of every learnable scalar with a gradient buffer of equal
/// length. Each allocated slice belongs to a named group carrying a learning
/// rate multiplier.
class ParamTape {
 public:
  ParamSlice allocate(const std::string& group, Eigen::Index size);

  Eigen::Index size() const { return values_.size(); }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& grads() { return grads_; }
  const Eigen::VectorXd& grads() const { return grads_; }

  Eigen::VectorXd::SegmentReturnType view(ParamSlice s) { return values_.segment(s.offset, s.size); }
  Eigen::VectorXd::ConstSegmentReturnType view(ParamSlice s) const { return values_.segment(s.offset, s.size); }

  void zero_grad() { grads_.setZero(); }

  const std::vector<ParamGroup>& groups() const { return groups_; }
  /// Creates the group if needed.
  int group_id(const std::string& name);
  int find_group(const std::string& name) const;
  void set_lr_multiplier(const std::string& group, double multiplier);
  /// Per-parameter learning rate multipliers.
  Eigen::VectorXd lr_multipliers() const;
  /// Parameter count per group name.
  Eigen::Index group_size(const std::string& name) const;

  /// "group[i]" label for parameter index i, used in diagnostics.
  std::string describe(Eigen::Index index) const;

 private:
  struct Segment {
    ParamSlice slice;
    int group;
  };
  Eigen::VectorXd values_;
  Eigen::VectorXd grads_;
  std::vector<ParamGroup> groups_;
  std::vector<Segment> segments_;
};

}  // namespace facelight
