//
// Copyright 2026 The dpbyz Authors
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
//

// Worker-side differentially private upload and the learning-rate rules
// that go with normalized DP-SGD.
//
// An honest upload is
//   g = (1/b_c) * ( sum_j phi_j / ||phi_j|| + N(0, sigma^2 I) ),
//   phi_j = (1 - beta) * grad_j + beta * phi_j(previous round),
// so each slot contributes a unit vector and the un-noised sum has
// l2-sensitivity 2 under replacement of one example.

#ifndef DPBYZ_DP_ENGINE_HPP_
#define DPBYZ_DP_ENGINE_HPP_

#include <cstddef>
#include <functional>

#include "dpbyz/model.hpp"
#include "dpbyz/numerics.hpp"
#include "dpbyz/worker.hpp"

namespace dpbyz {

using LabelTransform = std::function<int(int)>;

// Samples a b_c mini-batch from the worker's shard, updates momentum slots
// and returns the noisy normalized average. `relabel`, when set, is applied
// to every sampled label before the gradient is taken.
ParamVector dp_upload(WorkerState& worker, const MlpModel& model, double sigma,
                      RngStream& rng, MomentumReset reset = MomentumReset::kOverwriteSlots,
                      const LabelTransform& relabel = {});

inline ParamVector honest_upload(WorkerState& worker, const MlpModel& model, double sigma,
                                 RngStream& rng,
                                 MomentumReset reset = MomentumReset::kOverwriteSlots) {
  return dp_upload(worker, model, sigma, rng, reset);
}

// sum_j v_j / ||v_j||, with zero-norm entries contributing nothing.
ParamVector normalized_sum(std::span<const ParamVector> vs);

// eta = base_eta * base_sigma / sigma: keeps eta * sigma constant across
// privacy levels once the base pair has been tuned.
double plan_learning_rate(double base_eta, double base_sigma, double sigma);

struct ConvergenceParams {
  double initial_loss = 1.0;  // F(w^0)
  double smoothness = 1.0;    // L
  double grad_noise = 0.0;    // nu
  std::size_t batch_size = 16;
  std::size_t dim = 1;
};

// Signal-to-noise ratio sigma^2 d / b_c^2; the closed-form rate assumes it is
// much larger than one.
double noise_dominance(const ConvergenceParams& p, double sigma);

// eta = (1/sigma) * sqrt(2 F0 b_c^2 / (T L d)). Writes a warning to stderr
// when noise_dominance < 10.
double theoretical_eta(const ConvergenceParams& p, double sigma, long iterations);

// Bound on the average gradient norm after T normalized steps:
//   3 F0 / (T eta) + (3 L eta / 2) (1 + sigma^2 d / b_c^2) + 8 nu.
double convergence_bound(const ConvergenceParams& p, double sigma, long iterations,
                         double eta);

}  // namespace dpbyz

#endif  // DPBYZ_DP_ENGINE_HPP_
