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

#include "dpbyz/attacks.hpp"

#include <cmath>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {

ParamVector gaussian_attack(double sigma, std::size_t d, std::size_t batch_size,
                            RngStream& rng) {
  if (batch_size == 0) throw InvalidParameterError("gaussian_attack: b_c must be >= 1");
  return gaussian_vector(rng, d, sigma / static_cast<double>(batch_size));
}

int flip_label(int label, int num_classes) { return num_classes - 1 - label; }

ParamVector label_flip_attack(WorkerState& worker, const MlpModel& model, double sigma,
                              RngStream& rng, MomentumReset reset) {
  const int h = static_cast<int>(model.sizes().classes);
  return dp_upload(worker, model, sigma, rng, reset,
                   [h](int label) { return flip_label(label, h); });
}

void check_optimized_attack_feasible(std::size_t num_benign, std::size_t num_malicious) {
  if (num_benign == 0) throw InfeasibleError("optimized attack needs at least one benign upload");
  if (!(static_cast<double>(num_malicious) > std::sqrt(static_cast<double>(num_benign)))) {
    throw InfeasibleError("optimized local poisoning needs M_n > sqrt(B_m); got M_n=" +
                          std::to_string(num_malicious) + ", B_m=" + std::to_string(num_benign));
  }
}

double optimized_attack_lambda(std::size_t num_benign, std::size_t num_malicious) {
  return static_cast<double>(num_malicious) / std::sqrt(static_cast<double>(num_benign)) - 1.0;
}

std::vector<ParamVector> optimized_attack(std::span<const ParamVector> benign_uploads,
                                          std::size_t num_malicious,
                                          std::optional<double> lambda) {
  check_optimized_attack_feasible(benign_uploads.size(), num_malicious);
  const double lam = lambda.value_or(optimized_attack_lambda(benign_uploads.size(), num_malicious));
  ParamVector upload = sum_of(benign_uploads);
  upload *= -(1.0 + lam) / static_cast<double>(num_malicious);
  return std::vector<ParamVector>(num_malicious, upload);
}

long first_malicious_round(double ttbb, long total_rounds) {
  if (!(ttbb >= 0.0 && ttbb <= 1.0)) throw InvalidParameterError("ttbb must be in [0, 1]");
  return static_cast<long>(std::ceil(ttbb * static_cast<double>(total_rounds) - 1e-9));
}

ParamVector adaptive_wrap(const AttackSpec& spec, long round, long total_rounds,
                          const std::function<ParamVector()>& malicious,
                          const ParamVector& honest_copy_source) {
  if (round < first_malicious_round(spec.ttbb, total_rounds)) return honest_copy_source;
  return malicious();
}

ParamVector little_attack(std::span<const ParamVector> benign_uploads, double k) {
  if (benign_uploads.size() < 2) throw InvalidParameterError("little_attack: need >= 2 uploads");
  const std::size_t n = benign_uploads.size(), d = benign_uploads.front().dim();
  ParamVector mean = sum_of(benign_uploads);
  mean *= 1.0 / static_cast<double>(n);
  ParamVector out(d);
  for (std::size_t c = 0; c < d; ++c) {
    double var = 0.0;
    for (const auto& g : benign_uploads) var += (g[c] - mean[c]) * (g[c] - mean[c]);
    out[c] = mean[c] + k * std::sqrt(var / static_cast<double>(n - 1));
  }
  return out;
}

}  // namespace dpbyz
