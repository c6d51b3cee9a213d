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

// The federated round loop: broadcast, honest uploads, attacker uploads,
// aggregation, update, periodic evaluation.

#ifndef DPBYZ_HARNESS_HPP_
#define DPBYZ_HARNESS_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dpbyz/aggregation.hpp"
#include "dpbyz/config.hpp"
#include "dpbyz/data.hpp"

namespace dpbyz {

struct RoundTrace {
  long round = 0;
  // First-stage verdict for every upload. Always computed; it only gates
  // the update for two_stage or when compose_first_agg is set.
  std::vector<FirstStageVerdict> verdicts;
  std::vector<double> increments;      // two_stage only
  std::vector<double> scores;          // accumulated, two_stage only
  std::vector<std::size_t> selected;   // workers whose uploads entered the update
  std::optional<double> accuracy;      // set on evaluation rounds
  double wall_seconds = 0.0;

  std::vector<std::size_t> rejected_first_stage() const;
};

// Quantities derived from the config before round 1.
struct RunPlan {
  std::size_t local_size = 0;  // |D_i| used for q and delta
  double q = 0.0;
  double delta = 0.0;
  long rounds = 0;
  double sigma = 0.0;
  double eta = 0.0;
  long eval_every = 1;
  std::size_t dim = 0;
};

struct RunResult {
  ExperimentConfig config;
  RunPlan plan;
  std::vector<bool> byzantine;  // ground truth per worker
  std::vector<RoundTrace> traces;

  // Accuracy of the last evaluated round; NaN when no round ran.
  double final_accuracy() const;
};

// Materialized data for one experiment: worker shards over `train`, plus the
// server's auxiliary set and the held-out test set.
struct ExperimentData {
  std::shared_ptr<const Dataset> train;
  PartitionPlan partition;
  Dataset auxiliary;
  Dataset test;
};

// Builds or loads the data described by the config. For file corpora the
// root is config.data_root or, when empty, $DPBYZ_DATA_ROOT.
ExperimentData prepare_data(const ExperimentConfig& config);

// Validates the config and resolves sigma, eta and T.
RunPlan plan_run(const ExperimentConfig& config, const ExperimentData& data);

using RoundCallback = std::function<void(const RoundTrace&)>;

// Runs every round. Throws before round 1 on an invalid config or an
// unreachable privacy budget. Deterministic in config.seed.
RunResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round = {});
RunResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                         const RoundCallback& on_round = {});

}  // namespace dpbyz

#endif  // DPBYZ_HARNESS_HPP_
