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

// Renyi-DP accountant for the Poisson-subsampled Gaussian mechanism and the
// noise-multiplier search built on it.

#ifndef DPBYZ_ACCOUNTANT_HPP_
#define DPBYZ_ACCOUNTANT_HPP_

#include <vector>

namespace dpbyz {

// How an RDP curve is turned into an (epsilon, delta) guarantee.
//   kTight:   eps = rdp(a) + log1p(-1/a) - (log(delta) + log(a)) / (a - 1)
//   kClassic: eps = rdp(a) + log(1/delta) / (a - 1)
// Both minimize over the order grid.
enum class RdpConversion { kTight, kClassic };

// {1.5, 2, 3, ..., 64, 128, 256}
std::vector<double> default_rdp_orders();

struct AccountantOptions {
  std::vector<double> orders = default_rdp_orders();
  RdpConversion conversion = RdpConversion::kTight;
};

// RDP of one step of the sampled Gaussian mechanism at order alpha > 1,
// sampling rate q in (0, 1] and noise multiplier sigma > 0.
double rdp_subsampled_gaussian(double q, double sigma, double alpha);

// Epsilon after `steps` compositions at the given delta.
double accountant_epsilon(double sigma, double q, long steps, double delta,
                          const AccountantOptions& options = {});

// Smallest sigma in [1e-2, 1e2] whose epsilon is at most `epsilon`, to an
// absolute tolerance of 1e-6. Throws InfeasibleError when even sigma = 100
// does not meet the budget.
double solve_sigma(double epsilon, double delta, double q, long steps,
                   const AccountantOptions& options = {});

struct PrivacyBudget {
  double epsilon = 2.0;
  double delta = 1e-5;
  double q = 0.01;
  long steps = 1;
  double sigma = 0.0;

  static PrivacyBudget calibrate(double epsilon, double delta, double q, long steps,
                                 const AccountantOptions& options = {});
};

// Default delta = 1 / |D_i|^1.1.
double default_delta(std::size_t local_dataset_size);

}  // namespace dpbyz

#endif  // DPBYZ_ACCOUNTANT_HPP_
