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

#include "facelight/optimizer.hpp"

#include "facelight/core.hpp"

#include <algorithm>
#include <cmath>

namespace facelight {

void adam_step(ParamTape& tape, AdamState& state, double lr, const AdamConfig& config) {
  const Eigen::Index n = tape.size();
  if (state.m.size() != n) {
    state.m = Eigen::VectorXd::Zero(n);
    state.v = Eigen::VectorXd::Zero(n);
  }
  const Eigen::VectorXd& g = tape.grads();
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * g;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const Eigen::VectorXd mult = tape.lr_multipliers();
  const Eigen::ArrayXd m_hat = state.m.array() / c1;
  const Eigen::ArrayXd v_hat = state.v.array() / c2;
  tape.values().array() -= lr * mult.array() * m_hat / (v_hat.sqrt() + config.eps);
}

LrSchedule LrSchedule::standard(double base, long total) {
  if (total <= 0) throw DomainError("LrSchedule: total steps must be positive");
  return {base, total, std::max<long>(1, total / 8), 0.75};
}

int LrSchedule::halvings(long step) const {
  const double limit = cutoff * static_cast<double>(total);
  const double s = std::min(static_cast<double>(step), limit);
  return static_cast<int>(std::floor(s / static_cast<double>(interval)));
}

double LrSchedule::lr(long step) const { return std::ldexp(base, -halvings(step)); }

}  // namespace facelight
