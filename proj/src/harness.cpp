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

#include "dpbyz/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

#include "dpbyz/accountant.hpp"
#include "dpbyz/attacks.hpp"
#include "dpbyz/dp_engine.hpp"
#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

constexpr const char* kDataRootEnv = "DPBYZ_DATA_ROOT";

// Byzantine workers take the lowest indices so that index tie-breaks in
// selection never favour honest workers.
bool is_byzantine_slot(const ExperimentConfig& c, std::size_t i) { return i < c.n_byzantine; }

bool behaves_byzantine(const ExperimentConfig& c, std::size_t i) {
  return is_byzantine_slot(c, i) && c.attack.kind != AttackKind::kNone;
}

std::filesystem::path data_root(const ExperimentConfig& c) {
  if (!c.data_root.empty()) return c.data_root;
  if (const char* env = std::getenv(kDataRootEnv); env != nullptr && *env != '\0') return env;
  throw ConfigError("dataset '" + c.dataset + "' needs data_root or $" + kDataRootEnv);
}

ParamVector aggregate_baseline(Aggregator a, std::span<const ParamVector> uploads,
                               double baseline_gamma, std::vector<std::size_t>& selected) {
  switch (a) {
    case Aggregator::kKrum: {
      const std::size_t k = krum_index(uploads, baseline_gamma);
      selected = {k};
      return uploads[k];
    }
    case Aggregator::kRfa: return rfa_geometric_median(uploads);
    case Aggregator::kCoordinateMedian: return coordinate_median(uploads);
    case Aggregator::kTrimmedMean: return trimmed_mean(uploads, baseline_gamma);
    default: break;
  }
  throw InvalidParameterError("not a baseline aggregator");
}

}  // namespace

std::vector<std::size_t> RoundTrace::rejected_first_stage() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (!verdicts[i].passed()) out.push_back(i);
  }
  return out;
}

double RunResult::final_accuracy() const {
  for (auto it = traces.rbegin(); it != traces.rend(); ++it) {
    if (it->accuracy) return *it->accuracy;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ExperimentData prepare_data(const ExperimentConfig& c) {
  validate(c);
  const std::size_t n = c.num_workers();
  ExperimentData out;
  Dataset validation;
  Dataset train;
  if (c.dataset == "synthetic") {
    RngStream means_rng(c.seed, {StreamTag::kData, 0, 0});
    const BlobSpec spec = BlobSpec::make(c.num_classes, c.feature_dim, c.separation, means_rng);
    RngStream train_rng(c.seed, {StreamTag::kData, 1, 0});
    RngStream val_rng(c.seed, {StreamTag::kData, 2, 0});
    RngStream test_rng(c.seed, {StreamTag::kData, 3, 0});
    train = spec.sample(n * c.samples_per_worker, train_rng, "synthetic-train");
    if (c.validation_samples > 0) {
      validation = spec.sample(c.validation_samples, val_rng, "synthetic-validation");
    }
    out.test = spec.sample(c.test_samples, test_rng, "synthetic-test");
  } else {
    const auto root = data_root(c);
    Dataset full = load_idx_split(root, c.dataset, "train");
    out.test = load_idx_split(root, c.dataset, "test");
    if (c.validation_samples >= full.size()) {
      throw ConfigError("validation_samples must be smaller than the training split");
    }
    std::vector<std::size_t> order(full.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream split_rng(c.seed, {StreamTag::kData, 2, 0});
    std::shuffle(order.begin(), order.end(), split_rng);
    const auto cut = order.begin() + static_cast<std::ptrdiff_t>(c.validation_samples);
    std::vector<std::size_t> val_idx(order.begin(), cut), train_idx(cut, order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    validation = full.subset(val_idx);
    train = full.subset(train_idx);
  }
  train.validate();
  out.test.validate();

  RngStream part_rng(c.seed, {StreamTag::kPartition, 0, 0});
  if (n > train.size()) throw ConfigError("more workers than training examples");
  out.partition = c.partition == PartitionMode::kIid ? partition_iid(train, n, part_rng)
                                                     : get_non_iid(train, n, part_rng);

  out.auxiliary.num_classes = train.num_classes;
  out.auxiliary.name = "auxiliary";
  if (c.aux_per_class > 0) {
    RngStream aux_rng(c.seed, {StreamTag::kAuxiliary, 0, 0});
    out.auxiliary = sample_auxiliary(validation, c.aux_per_class, aux_rng);
  }
  out.train = std::make_shared<const Dataset>(std::move(train));
  return out;
}

RunPlan plan_run(const ExperimentConfig& c, const ExperimentData& data) {
  validate(c);
  const std::size_t n = c.num_workers();
  if (data.partition.num_shards() != n) {
    throw ConfigError("partition has " + std::to_string(data.partition.num_shards()) +
                      " shards for " + std::to_string(n) + " workers");
  }
  if (data.test.feature_dim() != data.train->feature_dim() ||
      data.test.num_classes != data.train->num_classes) {
    throw ConfigError("test set does not match the training set's shape");
  }

  RunPlan plan;
  plan.local_size = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < n; ++i) {
    if (c.n_honest > 0 && is_byzantine_slot(c, i)) continue;
    plan.local_size = std::min(plan.local_size, data.partition.shards[i].size());
  }
  if (plan.local_size < c.batch_size) {
    throw ConfigError("smallest worker shard (" + std::to_string(plan.local_size) +
                      ") is below b_c = " + std::to_string(c.batch_size));
  }
  plan.q = static_cast<double>(c.batch_size) / static_cast<double>(plan.local_size);
  plan.delta = c.delta.value_or(default_delta(plan.local_size));
  plan.rounds = c.rounds.value_or(static_cast<long>(
      std::ceil(c.epochs * static_cast<double>(plan.local_size) /
                    static_cast<double>(c.batch_size) - 1e-9)));
  plan.sigma = c.sigma ? *c.sigma
                       : solve_sigma(c.epsilon, plan.delta, plan.q, std::max(plan.rounds, 1L));
  plan.eta = c.eta.value_or(plan_learning_rate(c.base_eta, c.base_sigma, plan.sigma));
  plan.eval_every = c.eval_every.value_or(std::max(1L, (plan.rounds + 49) / 50));

  LayerSizes sizes{data.train->feature_dim(), c.hidden,
                   static_cast<std::size_t>(data.train->num_classes)};
  plan.dim = sizes.param_count();
  if (plan.dim <= 18) throw ConfigError("model too small for the first-stage norm test");

  if (c.aggregator == Aggregator::kKrum) {
    const auto f = static_cast<std::size_t>(std::floor(c.baseline_gamma * static_cast<double>(n)));
    if (n < f + 3) throw ConfigError("krum needs n >= floor(baseline_gamma n) + 3");
  }
  if (c.aggregator == Aggregator::kTwoStage && data.auxiliary.size() == 0) {
    throw ConfigError("two_stage aggregation needs a nonempty auxiliary set");
  }
  return plan;
}

RunResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round) {
  return run_experiment(config, prepare_data(config), on_round);
}

RunResult run_experiment(const ExperimentConfig& c, const ExperimentData& data,
                         const RoundCallback& on_round) {
  RunResult result;
  result.config = c;
  result.plan = plan_run(c, data);
  const RunPlan& plan = result.plan;
  const std::size_t n = c.num_workers();
  const long T = plan.rounds;

  const LayerSizes sizes{data.train->feature_dim(), c.hidden,
                         static_cast<std::size_t>(data.train->num_classes)};
  RngStream init_rng(c.seed, {StreamTag::kServer, 0, 0});
  MlpModel model = MlpModel::initialized(sizes, init_rng);

  std::vector<WorkerState> workers(n);
  std::vector<std::size_t> honest_idx;
  result.byzantine.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    WorkerState& w = workers[i];
    w.index = i;
    w.data = data.train;
    w.shard = data.partition.shards[i];
    w.byzantine = behaves_byzantine(c, i);
    w.role = w.byzantine ? c.attack.kind : AttackKind::kNone;
    w.momentum = MomentumList(c.batch_size, plan.dim, c.beta);
    result.byzantine[i] = w.byzantine;
    if (!w.byzantine) honest_idx.push_back(i);
  }
  const std::size_t num_attackers = n - honest_idx.size();
  const long switch_round = first_malicious_round(c.attack.ttbb, T);

  ServerState server(n, data.auxiliary.examples, c.gamma, plan.sigma, c.batch_size);
  server.clamp_scores = c.clamp_scores;

  result.traces.reserve(static_cast<std::size_t>(T));
  std::vector<ParamVector> uploads(n);
  for (long t = 0; t < T; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const auto tu = static_cast<std::uint64_t>(t);

    for (std::size_t i : honest_idx) {
      RngStream rng(c.seed, {StreamTag::kWorker, i, tu});
      uploads[i] = honest_upload(workers[i], model, plan.sigma, rng, c.momentum_reset);
    }

    if (num_attackers > 0) {
      if (t < switch_round) {
        std::size_t src = honest_idx.front();
        if (c.copy_source == CopySource::kRandom) {
          RngStream rng(c.seed, {StreamTag::kAttacker, n, tu});
          src = honest_idx[static_cast<std::size_t>(rng() % honest_idx.size())];
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (workers[i].byzantine) uploads[i] = uploads[src];
        }
      } else if (c.attack.kind == AttackKind::kOptimizedLocal) {
        std::vector<ParamVector> benign;
        benign.reserve(honest_idx.size());
        for (std::size_t i : honest_idx) benign.push_back(uploads[i]);
        auto malicious = optimized_attack(benign, num_attackers, c.attack.lambda_override);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (workers[i].byzantine) uploads[i] = std::move(malicious[k++]);
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (!workers[i].byzantine) continue;
          RngStream rng(c.seed, {StreamTag::kAttacker, i, tu});
          if (c.attack.kind == AttackKind::kGaussian) {
            uploads[i] = gaussian_attack(plan.sigma, plan.dim, c.batch_size, rng);
          } else {
            uploads[i] = label_flip_attack(workers[i], model, plan.sigma, rng, c.momentum_reset);
          }
        }
      }
    }

    RoundTrace trace;
    trace.round = t;
    if (c.aggregator == Aggregator::kTwoStage) {
      FilterOutcome outcome = filter_gradient(uploads, server, model);
      apply_update(model, outcome.selected_uploads(), plan.eta, n);
      trace.verdicts = std::move(outcome.verdicts);
      trace.increments = std::move(outcome.increments);
      trace.scores = server.scores;
      trace.selected = std::move(outcome.selected);
    } else {
      trace.verdicts.reserve(n);
      std::vector<ParamVector> inputs;
      inputs.reserve(n);
      for (const auto& g : uploads) {
        trace.verdicts.push_back(first_stage_check(g, plan.sigma, c.batch_size));
        inputs.push_back(c.compose_first_agg && !trace.verdicts.back().passed()
                             ? ParamVector(g.dim())
                             : g);
      }
      trace.selected.resize(n);
      std::iota(trace.selected.begin(), trace.selected.end(), 0);
      if (c.aggregator == Aggregator::kNone) {
        apply_update(model, inputs, plan.eta, n);
      } else {
        const ParamVector agg =
            aggregate_baseline(c.aggregator, inputs, c.baseline_gamma, trace.selected);
        model.mutable_params().axpy(-plan.eta, agg);
      }
    }

    if ((t + 1) % plan.eval_every == 0 || t == T - 1) {
      trace.accuracy = model.evaluate(data.test.examples);
    }
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_round) on_round(trace);
    result.traces.push_back(std::move(trace));
  }
  return result;
}

}  // namespace dpbyz
