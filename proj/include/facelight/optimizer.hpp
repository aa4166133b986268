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

#include "facelight/param_tape.hpp"

namespace facelight {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

/// Bias-corrected Adam update of every tape parameter from its gradient,
/// with the step size scaled by the parameter's group multiplier.
void adam_step(ParamTape& tape, AdamState& state, double lr, const AdamConfig& config = {});

/// Step-decay schedule: lr halves after every `interval` steps while the step
/// index is within the first `cutoff` fraction of `total` steps.
struct LrSchedule {
  double base = 1e-4;
  long total = 1;
  long interval = 1;
  double cutoff = 0.75;

  /// Interval defaults to total / 8, i.e. six halvings before the cutoff.
  static LrSchedule standard(double base, long total);
  int halvings(long step) const;
  double lr(long step) const;
};

}  // namespace facelight
