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

// Byzantine behaviours. Every attack here emits uploads in the honest wire
// format so that it has a chance of getting past the first-stage filter.

#ifndef DPBYZ_ATTACKS_HPP_
#define DPBYZ_ATTACKS_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dpbyz/dp_engine.hpp"
#include "dpbyz/model.hpp"
#include "dpbyz/numerics.hpp"
#include "dpbyz/worker.hpp"

namespace dpbyz {

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  // Fraction of the T rounds during which attackers copy an honest upload
  // before turning malicious. 0 = malicious from the first round.
  double ttbb = 0.0;
  std::optional<double> lambda_override;
};

// (1/b_c) * N(0, sigma^2 I_d).
ParamVector gaussian_attack(double sigma, std::size_t d, std::size_t batch_size, RngStream& rng);

// H - 1 - label.
int flip_label(int label, int num_classes);

// Honest pipeline run on flipped labels.
ParamVector label_flip_attack(WorkerState& worker, const MlpModel& model, double sigma,
                              RngStream& rng,
                              MomentumReset reset = MomentumReset::kOverwriteSlots);

// Default lambda = M_n / sqrt(B_m) - 1.
double optimized_attack_lambda(std::size_t num_benign, std::size_t num_malicious);

// Every malicious upload is -((1 + lambda) / M_n) * sum(benign), so that
// sum(malicious) + sum(benign) = -lambda * sum(benign). Throws
// InfeasibleError unless M_n > sqrt(B_m).
std::vector<ParamVector> optimized_attack(std::span<const ParamVector> benign_uploads,
                                          std::size_t num_malicious,
                                          std::optional<double> lambda = std::nullopt);

// Throws InfeasibleError when an optimized attack with these counts is
// impossible. Used to reject configurations up front.
void check_optimized_attack_feasible(std::size_t num_benign, std::size_t num_malicious);

// First round (0-based) in which an adaptive attacker is malicious:
// ceil(ttbb * T), so ttbb = 1 never attacks.
long first_malicious_round(double ttbb, long total_rounds);

// Copies the designated honest upload before the switch round and defers to
// `malicious` afterwards.
ParamVector adaptive_wrap(const AttackSpec& spec, long round, long total_rounds,
                          const std::function<ParamVector()>& malicious,
                          const ParamVector& honest_copy_source);

// "A little is enough"-style upload: coordinate-wise mean plus k standard
// deviations of the benign uploads. Used to show the first stage rejects it.
ParamVector little_attack(std::span<const ParamVector> benign_uploads, double k);

}  // namespace dpbyz

#endif  // DPBYZ_ATTACKS_HPP_
