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


#include "facelight/ad.hpp"
#include "facelight/validate.hpp"

#include <gtest/gtest.h>

namespace facelight {
namespace {

TEST(Autodiff, SumOfSquaresGradient) {
  ParamTape tape;
  const ParamSlice s = tape.allocate("p", 6);
  tape.values() << 0.5, -1, 2, 3.25, 0, -7;
  ad::Graph g;
  const ad::Node p = g.parameter(tape, s, 2, 3);
  g.backward(ad::sum(ad::square(p)), tape.grads());
  EXPECT_EQ(tape.grads(), 2.0 * tape.values());
}

TEST(Autodiff, BackwardAccumulatesIntoParameterGradient) {
  ParamTape tape;
  const ParamSlice s = tape.allocate("p", 2);
  tape.values() << 1, 2;
  for (int pass = 0; pass < 2; ++pass) {
    ad::Graph g;
    g.backward(ad::sum(g.parameter(tape, s, 2, 1) * 3.0), tape.grads());
  }
  EXPECT_EQ(tape.grads(), Eigen::Vector2d(6, 6));
}

TEST(Autodiff, InactiveClampPassesGradient) {
  ad::Graph g;
  const ad::Node x = g.variable(ad::Array::Constant(1, 4, 2.0));
  const ad::Node y = ad::sum(ad::max(x, g.constant(0.0)) + ad::relu(x) * 2.0);
  g.backward(y);
  EXPECT_TRUE((g.grad(x) == 3.0).all());
}

TEST(Autodiff, DetachStopsGradient) {
  ad::Graph g;
  const ad::Node x = g.variable(ad::Array::Constant(1, 3, 1.5));
  g.backward(ad::sum(ad::detach(x) * x));
  EXPECT_TRUE((g.grad(x) == 1.5).all());
}

TEST(Autodiff, BroadcastingReducesGradient) {
  ad::Graph g;
  const ad::Node row = g.variable(ad::Array::Constant(1, 4, 1.0));
  const ad::Node col = g.variable(ad::Array::Constant(3, 1, 2.0));
  const ad::Node m = g.variable(ad::Array::Ones(3, 4));
  g.backward(ad::sum(m * row + col));
  EXPECT_TRUE((g.grad(row) == 3.0).all());
  EXPECT_TRUE((g.grad(col) == 4.0).all());
}

TEST(Autodiff, NoGradGraphKeepsValues) {
  ad::Graph g(false);
  const ad::Node x = g.constant(ad::Array::Constant(2, 2, 4.0));
  EXPECT_TRUE((ad::sqrt(x).value() == 2.0).all());
  EXPECT_FALSE(g.requires_grad());
}

TEST(Autodiff, FiniteDifferenceBattery) {
  const std::vector<ValidationRow> rows = run_validation("gradients");
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.test << " " << r.parameter << " " << r.rel_error;
}

}  // namespace
}  // namespace facelight
