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

// Server-side aggregation.
//
// The two-stage filter first zeroes any upload that does not look like the
// DP noise an honest worker emits (norm interval + KS test), then scores the
// survivors by inner product with a gradient computed on a small auxiliary
// set, accumulates those scores across rounds and keeps the top ceil(gamma n)
// workers. Krum, RFA, coordinate-wise median and trimmed mean are provided as
// comparison aggregators.

#ifndef DPBYZ_AGGREGATION_HPP_
#define DPBYZ_AGGREGATION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "dpbyz/model.hpp"
#include "dpbyz/numerics.hpp"
#include "dpbyz/statistics.hpp"

namespace dpbyz {

struct FirstStageVerdict {
  bool norm_ok = false;
  KsVerdict ks;
  bool passed() const { return norm_ok && ks.pass; }
};

// Tests an upload as emitted by honest workers, i.e. already divided by b_c:
// the norm interval is divided by b_c and KS compares against N(0,(sigma/b_c)^2).
FirstStageVerdict first_stage_check(const ParamVector& g, double sigma, std::size_t batch_size);

// Returns g if it passes both tests and the zero vector otherwise.
ParamVector first_agg(const ParamVector& g, double sigma, std::size_t batch_size);

struct ServerState {
  std::vector<double> scores;        // accumulated, one per worker
  std::vector<Example> aux_data;     // D_p
  double gamma = 0.5;                // prior fraction of honest workers
  double sigma = 1.0;
  std::size_t batch_size = 16;
  bool clamp_scores = false;         // drop negative increments

  ServerState() = default;
  ServerState(std::size_t n, std::vector<Example> aux, double gamma, double sigma,
              std::size_t batch_size);

  std::size_t num_workers() const { return scores.size(); }
  // ceil(gamma * n), at least 1.
  std::size_t select_count() const;
};

// Everything one call to filter_gradient decided.
struct FilterOutcome {
  std::vector<ParamVector> filtered;       // first_agg applied to each upload
  std::vector<FirstStageVerdict> verdicts;
  std::vector<double> raw_scores;          // <g_i, g_s>
  std::vector<double> increments;          // after suppression
  double threshold = 0.0;                  // mean of the top ceil(gamma n) raw scores
  std::vector<std::size_t> selected;       // worker indices, ascending

  std::vector<ParamVector> selected_uploads() const;
};

// Mean of the k largest values.
double top_k_mean(std::span<const double> values, std::size_t k);

// Indices of the k largest values; ties go to the lower index. Returned in
// ascending index order.
std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k);

// Scores the uploads against `server_gradient` and updates server.scores.
// Split out from filter_gradient so the scoring rule can be driven directly.
FilterOutcome score_and_select(std::vector<ParamVector> filtered,
                               std::vector<FirstStageVerdict> verdicts,
                               const ParamVector& server_gradient, ServerState& server);

FilterOutcome filter_gradient(std::span<const ParamVector> uploads, ServerState& server,
                              const MlpModel& model);

// w <- w - eta * (1/n) * sum(selected). n is the total worker count.
void apply_update(MlpModel& model, std::span<const ParamVector> selected, double eta,
                  std::size_t n);

// Krum with neighbourhood size n - floor(gamma n) - 2. Returns the index of
// the chosen upload; ties go to the lowest index.
std::size_t krum_index(std::span<const ParamVector> uploads, double gamma);
ParamVector krum(std::span<const ParamVector> uploads, double gamma);

// Weiszfeld iterations for the geometric median; distances are floored at
// 1e-8.
ParamVector rfa_geometric_median(std::span<const ParamVector> uploads, int max_iter = 1000,
                                 double tol = 1e-10);

ParamVector coordinate_median(std::span<const ParamVector> uploads);

// Per coordinate, drop the floor(gamma n) largest and smallest values and
// average the rest.
ParamVector trimmed_mean(std::span<const ParamVector> uploads, double gamma);

}  // namespace dpbyz

#endif  // DPBYZ_AGGREGATION_HPP_
