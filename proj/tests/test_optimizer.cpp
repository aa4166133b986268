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


#include "facelight/loss.hpp"
#include "facelight/optimizer.hpp"
#include "facelight/sh.hpp"

#include <gtest/gtest.h>

namespace facelight {
namespace {

TEST(Adam, FirstStepMovesEachCoordinateByLr) {
  ParamTape tape;
  tape.allocate("a", 5);
  tape.values() << 1, 2, 3, 4, 5;
  tape.grads() << 0.5, -3, 1e-3, 100, -0.2;
  AdamState state;
  const Eigen::VectorXd before = tape.values();
  adam_step(tape, state, 1e-3);
  const Eigen::VectorXd delta = tape.values() - before;
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(std::abs(delta(i)), 1e-3, 1e-7);
    EXPECT_LT(delta(i) * tape.grads()(i), 0.0);
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParamTape tape;
  tape.allocate("a", 3);
  tape.values() << 1, 2, 3;
  tape.zero_grad();
  AdamState state;
  adam_step(tape, state, 0.1);
  EXPECT_EQ(tape.values(), Eigen::Vector3d(1, 2, 3));
}

TEST(Adam, GroupMultiplierScalesStep) {
  ParamTape tape;
  tape.allocate("slow", 1);
  tape.allocate("fast", 1);
  tape.set_lr_multiplier("fast", 10.0);
  tape.set_lr_multiplier("slow", 0.0);
  tape.grads().setOnes();
  AdamState state;
  adam_step(tape, state, 1e-3);
  EXPECT_EQ(tape.values()(0), 0.0);
  EXPECT_NEAR(tape.values()(1), -1e-2, 1e-8);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    ParamTape tape;
    tape.allocate("a", 4);
    AdamState state;
    for (int s = 0; s < 20; ++s) {
      tape.grads() = 2.0 * tape.values() - Eigen::Vector4d(1, -2, 3, 0.5);
      adam_step(tape, state, 0.05);
    }
    return tape.values();
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, MinimizesQuadratic) {
  ParamTape tape;
  tape.allocate("a", 2);
  AdamState state;
  for (int s = 0; s < 3000; ++s) {
    tape.grads() = 2.0 * (tape.values() - Eigen::Vector2d(3, -1));
    adam_step(tape, state, 0.01);
  }
  EXPECT_NEAR(tape.values()(0), 3.0, 1e-3);
  EXPECT_NEAR(tape.values()(1), -1.0, 1e-3);
}

TEST(LrSchedule, HalvesUntilCutoff) {
  const LrSchedule s = LrSchedule::standard(1e-4, 3000);
  EXPECT_EQ(s.interval, 375);
  EXPECT_EQ(s.lr(0), 1e-4);
  EXPECT_EQ(s.lr(374), 1e-4);
  EXPECT_EQ(s.lr(375), 5e-5);
  EXPECT_EQ(s.halvings(2249), 5);
  EXPECT_EQ(s.halvings(2250), 6);
  EXPECT_EQ(s.halvings(2999), 6);
  EXPECT_THROW(LrSchedule::standard(1e-4, 0), DomainError);
}

TEST(ParamTape, GroupsAndLabels) {
  ParamTape tape;
  const ParamSlice a = tape.allocate("material", 4);
  const ParamSlice b = tape.allocate("light", 3);
  tape.allocate("material", 2);
  EXPECT_EQ(a.offset, 0);
  EXPECT_EQ(b.offset, 4);
  EXPECT_EQ(tape.size(), 9);
  EXPECT_EQ(tape.group_size("material"), 6);
  EXPECT_EQ(tape.describe(5), "light[1]");
  EXPECT_EQ(tape.describe(8), "material[1]");
  tape.set_lr_multiplier("light", 3.0);
  EXPECT_EQ(tape.lr_multipliers()(6), 3.0);
  EXPECT_EQ(tape.lr_multipliers()(0), 1.0);
}

TEST(Loss, DefaultWeights) {
  const LossWeights w;
  EXPECT_EQ(w.rgb, 1.0);
  EXPECT_EQ(w.white, 5e-3);
  EXPECT_EQ(w.spec, 8e-3);
  EXPECT_EQ(w.eikonal, 1e-1);
  EXPECT_EQ(w.residual, 1e-3);
}

TEST(Loss, IdenticalRenderHasZeroRgbLoss) {
  ad::Graph g(false);
  const ad::Array x = ad::Array::Random(3, 10);
  EXPECT_EQ(loss_rgb(g.constant(x), g.constant(x)).scalar(), 0.0);
}

TEST(Loss, GrayLightHasZeroWhiteLoss) {
  ad::Graph g(false);
  ad::Array light = ad::Array::Zero(3, sh_count(3));
  const Eigen::ArrayXd row = Eigen::ArrayXd::Random(sh_count(3));
  for (int c = 0; c < 3; ++c) light.row(c) = row.transpose();
  EXPECT_NEAR(loss_white(g.constant(light), 3).scalar(), 0.0, 1e-15);
  light(0, 0) += 1.0;
  EXPECT_GT(loss_white(g.constant(light), 3).scalar(), 0.0);
}

TEST(Loss, UnitGradientsHaveZeroEikonalLoss) {
  ad::Graph g(false);
  ad::Array grad = ad::Array::Random(3, 50);
  for (Eigen::Index i = 0; i < grad.cols(); ++i) grad.col(i) /= grad.col(i).matrix().norm();
  EXPECT_NEAR(loss_eikonal(g.constant(grad)).scalar(), 0.0, 1e-15);
  EXPECT_NEAR(loss_eikonal(g.constant(2.0 * grad)).scalar(), 1.0, 1e-15);
}

TEST(Loss, TotalIsWeightedSum) {
  ad::Graph g(false);
  const ad::Array rendered = ad::Array::Random(3, 8), observed = ad::Array::Random(3, 8);
  const ad::Array light = ad::Array::Random(3, 4), spec = ad::Array::Random(3, 8).abs();
  const ad::Array grad = ad::Array::Random(3, 6), disp = ad::Array::Random(1, 6);
  LossWeights w;
  w.white = 0.5;
  w.residual = 2.0;
  const LossNodes n = loss_total(g.constant(rendered), g.constant(observed), g.constant(light), 1, g.constant(spec),
                                 g.constant(grad), g.constant(disp), w);
  const LossBreakdown b = n.values();
  EXPECT_NEAR(b.rgb, (rendered - observed).abs().mean(), 1e-15);
  EXPECT_NEAR(b.spec, spec.mean(), 1e-15);
  EXPECT_NEAR(b.residual, disp.abs().mean(), 1e-15);
  EXPECT_NEAR(b.total, b.rgb + 0.5 * b.white + w.spec * b.spec + w.eikonal * b.eikonal + 2.0 * b.residual, 1e-14);
}

}  // namespace
}  // namespace facelight
