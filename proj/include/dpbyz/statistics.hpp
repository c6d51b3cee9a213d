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

// Goodness-of-fit machinery used to decide whether an upload looks like
// N(0, sigma^2 I) noise: the chi-square norm interval, the one-sample
// Kolmogorov-Smirnov statistic and its asymptotic p-value, and the
// per-order-statistic interval that a passing vector must satisfy.

#ifndef DPBYZ_STATISTICS_HPP_
#define DPBYZ_STATISTICS_HPP_

#include <cstddef>

#include "dpbyz/numerics.hpp"

namespace dpbyz {

inline constexpr double kKsSignificance = 0.05;

// CDF of N(0, sigma^2) at x. Throws InvalidParameterError for sigma <= 0.
double normal_cdf(double x, double sigma);
// Inverse of normal_cdf for p in (0, 1); +-infinity at the endpoints.
double normal_quantile(double p, double sigma);

// Three-standard-deviation interval on ||v|| for v ~ N(0, sigma^2 I_d),
// from the normal approximation ||v||^2 ~ N(sigma^2 d, 2 sigma^4 d).
struct NormTestBounds {
  double lower = 0.0;
  double upper = 0.0;
  double sigma = 0.0;
  std::size_t d = 0;

  // Requires d > 18 so the lower bound is real.
  static NormTestBounds make(double sigma, std::size_t d);
  // Same bounds divided by `factor`, for uploads that were pre-averaged.
  NormTestBounds scaled(double factor) const;
  bool contains(double norm) const { return norm >= lower && norm <= upper; }
};

struct KsVerdict {
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;  // p_value >= kKsSignificance
};

// sup_x |C_d(x) - Phi_sigma(x)| with C_d the empirical CDF of v's entries.
double ks_statistic(const ParamVector& v, double sigma);

// Asymptotic Kolmogorov survival function Q(sqrt(d) * D).
double kolmogorov_pvalue(double statistic, std::size_t d);

KsVerdict ks_test(const ParamVector& v, double sigma, double significance = kKsSignificance);

// Largest statistic whose p-value still reaches `significance` at sample
// size d; a vector passes ks_test iff ks_statistic <= this value.
double ks_critical_value(std::size_t d, double significance = kKsSignificance);

// Interval the k-th smallest coordinate (1-based) must lie in for the KS
// statistic to stay within `d_crit`:
//   [ Phi^-1(k/d - d_crit), Phi^-1((k-1)/d + d_crit) ]
// with -inf / +inf where the envelope saturates.
struct ResilienceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool empty = false;
  bool contains(double x) const { return !empty && x >= lower && x <= upper; }
};

ResilienceInterval resilience_interval(std::size_t k, std::size_t d, double sigma,
                                       double d_crit);

// True iff every sorted coordinate of v lies in its resilience interval.
bool within_resilience_band(const ParamVector& v, double sigma, double d_crit);

}  // namespace dpbyz

#endif  // DPBYZ_STATISTICS_HPP_
