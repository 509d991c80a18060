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

namespace gmocp {

double PinballLoss(double alpha_bar, double alpha, double target_alpha) {
  const double diff = alpha_bar - alpha;
  return target_alpha * diff - std::min(0.0, diff);
}

double PinballGradient(double alpha_bar, double alpha, double target_alpha) {
  const double err = alpha_bar < alpha ? 1.0 : 0.0;
  return err - target_alpha;
}

AlphaState SfogdStep(AlphaState state, double gradient) {
  state.grad_sq_sum += gradient * gradient;
  if (state.grad_sq_sum > 0.0) {
    state.alpha -= state.eta * gradient / std::sqrt(state.grad_sq_sum);
  }
  return state;
}

}  // namespace gmocp
