// Copyright 2026 The GMOCP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "gmocp/adapt.h"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gmocp/rng.h"

namespace gmocp {
namespace {

TEST(PinballTest, Examples) {
  EXPECT_DOUBLE_EQ(PinballLoss(0.4, 0.4, 0.1), 0.0);
  EXPECT_NEAR(PinballLoss(0.5, 0.2, 0.1), 0.03, 1e-15);
  EXPECT_NEAR(PinballLoss(0.2, 0.5, 0.1), 0.27, 1e-15);
}

TEST(PinballTest, GradientExamples) {
  EXPECT_DOUBLE_EQ(PinballGradient(0.2, 0.5, 0.1), 0.9);
  EXPECT_DOUBLE_EQ(PinballGradient(0.5, 0.2, 0.1), -0.1);
  EXPECT_DOUBLE_EQ(PinballGradient(0.3, 0.3, 0.1), -0.1);
}

TEST(PinballTest, NonNegative) {
  Rng rng(1, StreamId::kOracle, 0);
  for (int i = 0; i < 10000; ++i) {
    const double bar = rng.Uniform();
    const double alpha = -0.1 + 1.2 * rng.Uniform();
    const double target = 0.01 + 0.98 * rng.Uniform();
    EXPECT_GE(PinballLoss(bar, alpha, target), 0.0);
  }
}

TEST(PinballTest, GradientMatchesFiniteDifference) {
  Rng rng(2, StreamId::kOracle, 0);
  constexpr double kH = 1e-6;
  for (int i = 0; i < 5000; ++i) {
    const double bar = rng.Uniform();
    const double alpha = -0.1 + 1.2 * rng.Uniform();
    if (std::abs(alpha - bar) < 10 * kH) continue;
    const double target = 0.01 + 0.98 * rng.Uniform();
    const double fd = (PinballLoss(bar, alpha + kH, target) -
                       PinballLoss(bar, alpha - kH, target)) /
                      (2 * kH);
    EXPECT_NEAR(fd, PinballGradient(bar, alpha, target), 1e-4);
  }
}

TEST(SfogdTest, FirstStepCovered) {
  const AlphaState next = SfogdUpdate(AlphaState{0.1, 0.0, 0.05}, 0.5, 0.1);
  EXPECT_NEAR(next.alpha, 0.15, 1e-15);
  EXPECT_NEAR(next.grad_sq_sum, 0.01, 1e-15);
}

TEST(SfogdTest, FirstStepMiss) {
  const AlphaState next = SfogdUpdate(AlphaState{0.1, 0.0, 0.05}, 0.0, 0.1);
  EXPECT_NEAR(next.alpha, 0.05, 1e-15);
}

// Feedback must come from some alpha_bar in [0, 1]: below zero the set is
// everything and cannot miss, above one it is empty and cannot cover.
TEST(SfogdTest, AlternatingStaysInRange) {
  AlphaState s{0.1, 0.0, 0.05};
  for (int i = 0; i < 100; ++i) {
    const double offset = i % 2 == 0 ? 0.01 : -0.01;
    const double bar = std::clamp(s.alpha + offset, 0.0, 1.0);
    s = SfogdUpdate(s, bar, 0.1);
    EXPECT_GE(s.alpha, -0.05);
    EXPECT_LE(s.alpha, 1.05);
  }
}

TEST(SfogdTest, RandomSequencesStayInRange) {
  for (int seq = 0; seq < 20; ++seq) {
    Rng rng(4, StreamId::kOracle, seq);
    const double target = 0.05 + 0.9 * rng.Uniform();
    const double skew = 0.2 + 4.0 * rng.Uniform();
    AlphaState s{target, 0.0, 0.01 + 0.2 * rng.Uniform()};
    double prev_sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double bar = std::pow(rng.Uniform(), skew);
      s = SfogdUpdate(s, bar, target);
      ASSERT_GE(s.alpha, -s.eta);
      ASSERT_LE(s.alpha, 1.0 + s.eta);
      ASSERT_GE(s.grad_sq_sum, prev_sum);
      prev_sum = s.grad_sq_sum;
    }
  }
}

}  // namespace
}  // namespace gmocp
