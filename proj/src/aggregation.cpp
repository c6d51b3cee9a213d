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

#include "dpbyz/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

void check_uploads(std::span<const ParamVector> uploads, const char* who) {
  if (uploads.empty()) throw InvalidParameterError(std::string(who) + ": no uploads");
  const std::size_t d = uploads.front().dim();
  for (const auto& u : uploads) {
    if (u.dim() != d) throw DimensionMismatchError(std::string(who) + ": ragged uploads");
  }
}

std::size_t trim_count(std::size_t n, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidParameterError("gamma must be in [0, 1]");
  return static_cast<std::size_t>(std::floor(gamma * static_cast<double>(n)));
}

}  // namespace

FirstStageVerdict first_stage_check(const ParamVector& g, double sigma,
                                    std::size_t batch_size) {
  if (batch_size == 0) throw InvalidParameterError("first_stage_check: b_c must be >= 1");
  const double bc = static_cast<double>(batch_size);
  FirstStageVerdict v;
  const auto bounds = NormTestBounds::make(sigma, g.dim()).scaled(bc);
  v.norm_ok = bounds.contains(l2_norm(g));
  v.ks = ks_test(g, sigma / bc);
  return v;
}

ParamVector first_agg(const ParamVector& g, double sigma, std::size_t batch_size) {
  if (first_stage_check(g, sigma, batch_size).passed()) return g;
  return ParamVector(g.dim());
}

ServerState::ServerState(std::size_t n, std::vector<Example> aux, double gamma_,
                         double sigma_, std::size_t batch_size_)
    : scores(n, 0.0),
      aux_data(std::move(aux)),
      gamma(gamma_),
      sigma(sigma_),
      batch_size(batch_size_) {
  if (n == 0) throw InvalidParameterError("server needs at least one worker");
  if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw InvalidParameterError("gamma must be in (0, 1]");
}

std::size_t ServerState::select_count() const {
  const double k = std::ceil(gamma * static_cast<double>(scores.size()) - 1e-12);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, scores.size());
}

std::vector<ParamVector> FilterOutcome::selected_uploads() const {
  std::vector<ParamVector> out;
  out.reserve(selected.size());
  for (std::size_t i : selected) out.push_back(filtered[i]);
  return out;
}

std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k) {
  if (k > values.size()) throw InvalidParameterError("top_k_indices: k exceeds size");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double top_k_mean(std::span<const double> values, std::size_t k) {
  if (k == 0) throw InvalidParameterError("top_k_mean: k must be >= 1");
  double s = 0.0;
  for (std::size_t i : top_k_indices(values, k)) s += values[i];
  return s / static_cast<double>(k);
}

FilterOutcome score_and_select(std::vector<ParamVector> filtered,
                               std::vector<FirstStageVerdict> verdicts,
                               const ParamVector& server_gradient, ServerState& server) {
  const std::size_t n = server.num_workers();
  if (filtered.size() != n) {
    throw InvalidParameterError("expected " + std::to_string(n) + " uploads, got " +
                                std::to_string(filtered.size()));
  }
  FilterOutcome out;
  out.filtered = std::move(filtered);
  out.verdicts = std::move(verdicts);
  out.raw_scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.raw_scores[i] = inner(out.filtered[i], server_gradient);

  const std::size_t k = server.select_count();
  out.threshold = top_k_mean(out.raw_scores, k);
  out.increments = out.raw_scores;
  for (std::size_t i = 0; i < n; ++i) {
    double& inc = out.increments[i];
    if (inc < out.threshold) inc = 0.0;
    if (server.clamp_scores && inc < 0.0) inc = 0.0;
    server.scores[i] += inc;
  }
  out.selected = top_k_indices(server.scores, k);
  return out;
}

FilterOutcome filter_gradient(std::span<const ParamVector> uploads, ServerState& server,
                              const MlpModel& model) {
  if (server.aux_data.empty()) {
    throw ConfigError("filter_gradient: server auxiliary dataset is empty");
  }
  if (uploads.size() != server.num_workers()) {
    throw InvalidParameterError("filter_gradient: upload count does not match worker count");
  }
  std::vector<ParamVector> filtered;
  std::vector<FirstStageVerdict> verdicts;
  filtered.reserve(uploads.size());
  verdicts.reserve(uploads.size());
  for (const auto& g : uploads) {
    verdicts.push_back(first_stage_check(g, server.sigma, server.batch_size));
    filtered.push_back(verdicts.back().passed() ? g : ParamVector(g.dim()));
  }
  const ParamVector g_s = model.batch_gradient(server.aux_data);
  return score_and_select(std::move(filtered), std::move(verdicts), g_s, server);
}

void apply_update(MlpModel& model, std::span<const ParamVector> selected, double eta,
                  std::size_t n) {
  if (n == 0) throw InvalidParameterError("apply_update: n must be >= 1");
  const double scale = -eta / static_cast<double>(n);
  for (const auto& g : selected) model.mutable_params().axpy(scale, g);
}

std::size_t krum_index(std::span<const ParamVector> uploads, double gamma) {
  check_uploads(uploads, "krum");
  const std::size_t n = uploads.size();
  const std::size_t f = trim_count(n, gamma);
  if (n < f + 3) {
    throw InvalidParameterError("krum: need n - floor(gamma n) - 2 >= 1 (n=" +
                                std::to_string(n) + ")");
  }
  const std::size_t m = n - f - 2;

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = squared_distance(uploads[i], uploads[j]);
    }
  }
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(dist[i * n + j]);
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m - 1), row.end());
    std::sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m));
    const double score = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

ParamVector krum(std::span<const ParamVector> uploads, double gamma) {
  return uploads[krum_index(uploads, gamma)];
}

ParamVector rfa_geometric_median(std::span<const ParamVector> uploads, int max_iter,
                                 double tol) {
  check_uploads(uploads, "rfa_geometric_median");
  const std::size_t d = uploads.front().dim();
  ParamVector z = sum_of(uploads);
  z *= 1.0 / static_cast<double>(uploads.size());
  for (int it = 0; it < max_iter; ++it) {
    ParamVector next(d);
    double wsum = 0.0;
    for (const auto& g : uploads) {
      const double w = 1.0 / std::max(std::sqrt(squared_distance(z, g)), 1e-8);
      next.axpy(w, g);
      wsum += w;
    }
    next *= 1.0 / wsum;
    const double step = std::sqrt(squared_distance(next, z));
    z = std::move(next);
    if (step < tol) break;
  }
  return z;
}

ParamVector coordinate_median(std::span<const ParamVector> uploads) {
  check_uploads(uploads, "coordinate_median");
  const std::size_t n = uploads.size(), d = uploads.front().dim();
  ParamVector out(d);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = uploads[i][c];
    std::sort(col.begin(), col.end());
    out[c] = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return out;
}

ParamVector trimmed_mean(std::span<const ParamVector> uploads, double gamma) {
  check_uploads(uploads, "trimmed_mean");
  const std::size_t n = uploads.size(), d = uploads.front().dim();
  const std::size_t t = trim_count(n, gamma);
  if (n < 2 * t + 1) throw InvalidParameterError("trimmed_mean: trim exceeds population");
  ParamVector out(d);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = uploads[i][c];
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (std::size_t i = t; i < n - t; ++i) s += col[i];
    out[c] = s / static_cast<double>(n - 2 * t);
  }
  return out;
}

}  // namespace dpbyz
