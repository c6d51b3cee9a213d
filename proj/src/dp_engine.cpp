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

#include "dpbyz/dp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <iterator>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kGaussian: return "gaussian";
    case AttackKind::kLabelFlip: return "label_flip";
    case AttackKind::kOptimizedLocal: return "optimized_local";
  }
  return "none";
}

AttackKind attack_kind_from_string(std::string_view s) {
  if (s == "none") return AttackKind::kNone;
  if (s == "gaussian") return AttackKind::kGaussian;
  if (s == "label_flip") return AttackKind::kLabelFlip;
  if (s == "optimized_local") return AttackKind::kOptimizedLocal;
  throw ConfigError("unknown attack kind '" + std::string(s) + "'");
}

std::string_view to_string(MomentumReset mode) {
  return mode == MomentumReset::kOverwriteSlots ? "overwrite_slots" : "keep_slots";
}

MomentumReset momentum_reset_from_string(std::string_view s) {
  if (s == "overwrite_slots") return MomentumReset::kOverwriteSlots;
  if (s == "keep_slots") return MomentumReset::kKeepSlots;
  throw ConfigError("unknown momentum_reset mode '" + std::string(s) + "'");
}

MomentumList::MomentumList(std::size_t batch_size, std::size_t dim, double beta_)
    : slots(batch_size, ParamVector(dim)), beta(beta_) {
  if (batch_size == 0) throw InvalidParameterError("momentum list needs b_c >= 1");
  if (!(beta_ >= 0.0 && beta_ < 1.0)) throw InvalidParameterError("beta must be in [0, 1)");
}

ParamVector normalized_sum(std::span<const ParamVector> vs) {
  if (vs.empty()) throw InvalidParameterError("normalized_sum: empty set");
  ParamVector acc(vs.front().dim());
  for (const auto& v : vs) {
    const double n = l2_norm(v);
    if (n > 0.0) acc.axpy(1.0 / n, v);
  }
  return acc;
}

ParamVector dp_upload(WorkerState& worker, const MlpModel& model, double sigma,
                      RngStream& rng, MomentumReset reset, const LabelTransform& relabel) {
  auto& mom = worker.momentum;
  const std::size_t bc = mom.batch_size();
  if (!worker.data) throw InvalidParameterError("worker has no dataset");
  if (worker.shard.size() < bc) {
    throw InvalidParameterError("worker " + std::to_string(worker.index) + " holds " +
                                std::to_string(worker.shard.size()) +
                                " samples, fewer than b_c = " + std::to_string(bc));
  }
  if (mom.slots.front().dim() != model.dim()) {
    throw DimensionMismatchError("momentum slots do not match model dimension");
  }

  std::vector<std::size_t> batch;
  batch.reserve(bc);
  std::sample(worker.shard.begin(), worker.shard.end(), std::back_inserter(batch), bc, rng);

  const auto& examples = worker.data->examples;
  for (std::size_t j = 0; j < bc; ++j) {
    const Example& x = examples[batch[j]];
    const int label = relabel ? relabel(x.label) : x.label;
    ParamVector g = model.per_example_gradient(x.features, label);
    g *= 1.0 - mom.beta;
    g.axpy(mom.beta, mom.slots[j]);
    mom.slots[j] = std::move(g);
  }

  ParamVector upload = normalized_sum(mom.slots);
  upload += gaussian_vector(rng, model.dim(), sigma);
  upload *= 1.0 / static_cast<double>(bc);

  if (reset == MomentumReset::kOverwriteSlots) {
    for (auto& slot : mom.slots) slot = upload;
  }
  return upload;
}

double plan_learning_rate(double base_eta, double base_sigma, double sigma) {
  if (!(base_eta > 0.0 && base_sigma > 0.0 && sigma > 0.0)) {
    throw InvalidParameterError("plan_learning_rate: inputs must be positive");
  }
  return base_eta * base_sigma / sigma;
}

namespace {

void check_params(const ConvergenceParams& p, double sigma, long iterations) {
  if (!(p.initial_loss > 0.0 && p.smoothness > 0.0 && p.grad_noise >= 0.0 &&
        p.batch_size > 0 && p.dim > 0 && sigma > 0.0 && iterations > 0)) {
    throw InvalidParameterError("convergence parameters must be positive");
  }
}

}  // namespace

double noise_dominance(const ConvergenceParams& p, double sigma) {
  const double bc = static_cast<double>(p.batch_size);
  return sigma * sigma * static_cast<double>(p.dim) / (bc * bc);
}

double theoretical_eta(const ConvergenceParams& p, double sigma, long iterations) {
  check_params(p, sigma, iterations);
  if (noise_dominance(p, sigma) < 10.0) {
    std::cerr << "warning: sigma^2 d / b_c^2 = " << noise_dominance(p, sigma)
              << " < 10; the closed-form learning rate assumes noise dominates\n";
  }
  const double bc = static_cast<double>(p.batch_size);
  return std::sqrt(2.0 * p.initial_loss * bc * bc /
                   (static_cast<double>(iterations) * p.smoothness *
                    static_cast<double>(p.dim))) /
         sigma;
}

double convergence_bound(const ConvergenceParams& p, double sigma, long iterations,
                         double eta) {
  check_params(p, sigma, iterations);
  if (!(eta > 0.0)) throw InvalidParameterError("convergence_bound: eta must be positive");
  const double t = static_cast<double>(iterations);
  return 3.0 * p.initial_loss / (t * eta) +
         1.5 * p.smoothness * eta * (1.0 + noise_dominance(p, sigma)) + 8.0 * p.grad_noise;
}

}  // namespace dpbyz
