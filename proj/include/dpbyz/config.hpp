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

// Experiment configuration.
//
// Config files are flat `key = value` lines. `#` starts a comment, values may
// be double-quoted, and `[section]` headers are accepted but do not change
// key names: every key is globally unique. Unknown keys are errors.

#ifndef DPBYZ_CONFIG_HPP_
#define DPBYZ_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpbyz/attacks.hpp"
#include "dpbyz/worker.hpp"

namespace dpbyz {

enum class Aggregator { kTwoStage, kKrum, kRfa, kCoordinateMedian, kTrimmedMean, kNone };
std::string_view to_string(Aggregator a);
Aggregator aggregator_from_string(std::string_view s);

enum class PartitionMode { kIid, kNonIid };
std::string_view to_string(PartitionMode m);
PartitionMode partition_mode_from_string(std::string_view s);

// Which honest upload an adaptive attacker replays before it turns.
enum class CopySource { kLowest, kRandom };
std::string_view to_string(CopySource c);
CopySource copy_source_from_string(std::string_view s);

struct ExperimentConfig {
  // Data. "synthetic" generates Gaussian blobs; any other name is loaded from
  // <data_root>/<name>/{train,test}-{images,labels}.
  std::string dataset = "synthetic";
  std::string data_root;  // empty: $DPBYZ_DATA_ROOT
  std::size_t samples_per_worker = 400;
  std::size_t feature_dim = 784;
  int num_classes = 10;
  double separation = 4.0;
  std::size_t test_samples = 2000;
  std::size_t validation_samples = 1000;
  PartitionMode partition = PartitionMode::kIid;
  std::size_t hidden = 32;

  // Population.
  std::size_t n_honest = 20;
  std::size_t n_byzantine = 0;
  AttackSpec attack;
  CopySource copy_source = CopySource::kLowest;

  // Privacy.
  double epsilon = 2.0;
  std::optional<double> delta;  // default 1 / |D_i|^1.1
  std::optional<double> sigma;  // skips calibration when set

  // Optimization.
  std::size_t batch_size = 16;
  double beta = 0.1;
  double base_eta = 0.2;
  double base_sigma = 0.79;
  std::optional<double> eta;  // default base_eta * base_sigma / sigma
  double epochs = 10.0;
  std::optional<long> rounds;  // overrides the epoch-derived T
  MomentumReset momentum_reset = MomentumReset::kOverwriteSlots;
  std::optional<long> eval_every;  // default ceil(T / 50)

  // Server.
  Aggregator aggregator = Aggregator::kTwoStage;
  double gamma = 0.4;
  std::size_t aux_per_class = 2;
  double baseline_gamma = 0.2;  // f / n assumed by krum and trimmed mean
  bool compose_first_agg = false;  // run first_agg before a baseline
  bool clamp_scores = false;

  std::uint64_t seed = 1;

  std::size_t num_workers() const { return n_honest + n_byzantine; }
};

struct ConfigKey {
  std::string name;
  std::string help;
};

// Every recognised key, in canonical order.
const std::vector<ConfigKey>& config_keys();

// Sets one key from its textual value. Throws ConfigError for unknown keys
// and unparsable values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// Current value of a key, formatted so that apply_setting round-trips it.
std::string get_setting(const ExperimentConfig& config, std::string_view key);

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Throws ConfigError on inconsistent settings.
void validate(const ExperimentConfig& config);

// `key = value` lines for every key, in canonical order.
std::string canonical_text(const ExperimentConfig& config);

// 16 hex digits of FNV-1a over canonical_text.
std::string config_hash(const ExperimentConfig& config);

}  // namespace dpbyz

#endif  // DPBYZ_CONFIG_HPP_
