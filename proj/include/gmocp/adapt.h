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

#ifndef GMOCP_ADAPT_H_
#define GMOCP_ADAPT_H_

namespace gmocp {

// Per-model adaptive miscoverage level driven by scale-free online
// gradient descent. `alpha` stays within [-eta, 1 + eta].
struct AlphaState {
  double alpha = 0.1;
  double grad_sq_sum = 0.0;
  double eta = 0.05;
};

// target * (alpha_bar - alpha) - min(0, alpha_bar - alpha).
double PinballLoss(double alpha_bar, double alpha, double target_alpha);

// err - target with err = [alpha_bar < alpha]; equality counts as covered.
double PinballGradient(double alpha_bar, double alpha, double target_alpha);

// alpha <- alpha - eta * g / sqrt(sum of squared gradients so far).
AlphaState SfogdStep(AlphaState state, double gradient);

inline AlphaState SfogdUpdate(AlphaState state, double alpha_bar,
                              double target_alpha) {
  return SfogdStep(state,
                   PinballGradient(alpha_bar, state.alpha, target_alpha));
}

}  // namespace gmocp

#endif  // GMOCP_ADAPT_H_
