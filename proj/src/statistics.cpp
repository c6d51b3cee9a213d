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

#include "dpbyz/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSeriesCutoff = 1e-12;

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameterError("sigma must be positive and finite");
  }
}

}  // namespace

double normal_cdf(double x, double sigma) {
  check_sigma(sigma);
  return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

double normal_quantile(double p, double sigma) {
  check_sigma(sigma);
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameterError("normal_quantile: p outside [0,1]");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;
  return -std::numbers::sqrt2 * sigma * boost::math::erfc_inv(2.0 * p);
}

NormTestBounds NormTestBounds::make(double sigma, std::size_t d) {
  check_sigma(sigma);
  if (d <= 18) {
    throw InvalidParameterError("norm test needs d > 18 for a real lower bound");
  }
  const double s2 = sigma * sigma;
  const double dd = static_cast<double>(d);
  const double spread = 3.0 * s2 * std::sqrt(2.0 * dd);
  NormTestBounds b;
  b.sigma = sigma;
  b.d = d;
  b.lower = std::sqrt(s2 * dd - spread);
  b.upper = std::sqrt(s2 * dd + spread);
  return b;
}

NormTestBounds NormTestBounds::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidParameterError("NormTestBounds::scaled: factor must be > 0");
  NormTestBounds b = *this;
  b.lower /= factor;
  b.upper /= factor;
  return b;
}

double ks_statistic(const ParamVector& v, double sigma) {
  check_sigma(sigma);
  const std::size_t d = v.dim();
  if (d < 2) throw InvalidParameterError("ks_statistic: need at least 2 samples");
  std::vector<double> x(v.values().begin(), v.values().end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(d);
  double best = 0.0;
  for (std::size_t k = 1; k <= d; ++k) {
    const double f = normal_cdf(x[k - 1], sigma);
    best = std::max({best, static_cast<double>(k) / n - f, f - static_cast<double>(k - 1) / n});
  }
  return best;
}

double kolmogorov_pvalue(double statistic, std::size_t d) {
  if (d < 2) throw InvalidParameterError("kolmogorov_pvalue: need d >= 2");
  const double lambda = std::sqrt(static_cast<double>(d)) * std::max(0.0, statistic);
  if (lambda <= 0.0) return 1.0;
  double q = 0.0;
  if (lambda < 1.0) {
    // Jacobi-transformed form; the alternating series converges slowly here.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1;; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * c);
      s += term;
      if (term < kSeriesCutoff) break;
    }
    q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  } else {
    double sign = 1.0;
    for (int k = 1;; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      q += sign * term;
      if (term < kSeriesCutoff) break;
      sign = -sign;
    }
    q *= 2.0;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsVerdict ks_test(const ParamVector& v, double sigma, double significance) {
  KsVerdict out;
  out.statistic = ks_statistic(v, sigma);
  out.p_value = kolmogorov_pvalue(out.statistic, v.dim());
  out.pass = out.p_value >= significance;
  return out;
}

double ks_critical_value(std::size_t d, double significance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw InvalidParameterError("ks_critical_value: significance outside (0,1)");
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_pvalue(mid, d) >= significance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ResilienceInterval resilience_interval(std::size_t k, std::size_t d, double sigma,
                                       double d_crit) {
  check_sigma(sigma);
  if (k < 1 || k > d) throw InvalidParameterError("resilience_interval: k outside [1, d]");
  const double n = static_cast<double>(d);
  const double lo_p = static_cast<double>(k) / n - d_crit;
  const double hi_p = static_cast<double>(k - 1) / n + d_crit;
  ResilienceInterval r;
  r.lower = lo_p <= 0.0 ? -kInf : (lo_p >= 1.0 ? kInf : normal_quantile(lo_p, sigma));
  r.upper = hi_p >= 1.0 ? kInf : (hi_p <= 0.0 ? -kInf : normal_quantile(hi_p, sigma));
  r.empty = r.lower > r.upper;
  return r;
}

bool within_resilience_band(const ParamVector& v, double sigma, double d_crit) {
  std::vector<double> x(v.values().begin(), v.values().end());
  std::sort(x.begin(), x.end());
  for (std::size_t k = 1; k <= x.size(); ++k) {
    if (!resilience_interval(k, x.size(), sigma, d_crit).contains(x[k - 1])) return false;
  }
  return true;
}

}  // namespace dpbyz
