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

// dpbyz command-line tool.
//
//   dpbyz run --config FILE [--seed N] [--out DIR] [--<key> VALUE ...]
//   dpbyz sigma --eps E --delta D --q Q --T STEPS
//   dpbyz partition --dataset NAME --n N --mode iid|non_iid [--summary]
//   dpbyz aggbench [--n N] [--dim D] [--reps R]
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpbyz/accountant.hpp"
#include "dpbyz/aggregation.hpp"
#include "dpbyz/config.hpp"
#include "dpbyz/errors.hpp"
#include "dpbyz/harness.hpp"
#include "dpbyz/metrics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool quiet = false;
  std::map<std::string, std::string> overrides;
};

int cmd_run(const RunArgs& args) {
  dpbyz::ExperimentConfig config = dpbyz::load_config(args.config_path);
  for (const auto& [key, value] : args.overrides) dpbyz::apply_setting(config, key, value);
  if (args.seed) config.seed = *args.seed;

  const auto data = dpbyz::prepare_data(config);
  const auto plan = dpbyz::plan_run(config, data);
  if (!args.quiet) {
    std::fprintf(stderr, "T=%ld sigma=%.6f eta=%.6f q=%.6f delta=%.3g workers=%zu\n",
                 plan.rounds, plan.sigma, plan.eta, plan.q, plan.delta, config.num_workers());
  }
  const auto result = dpbyz::run_experiment(config, data, [&](const dpbyz::RoundTrace& t) {
    if (!args.quiet && t.accuracy) {
      std::fprintf(stderr, "round %ld accuracy %.4f rejected %zu\n", t.round, *t.accuracy,
                   t.rejected_first_stage().size());
    }
  });
  dpbyz::emit_metrics(result, args.out_dir);
  const auto summary = dpbyz::summarize(result);
  std::printf("config_hash=%s final_accuracy=%.4f precision=%.4f recall=%.4f\n",
              summary.config_hash.c_str(), summary.final_accuracy, summary.quality.precision,
              summary.quality.recall);
  return kExitOk;
}

int cmd_sigma(double eps, double delta, double q, long steps, const std::string& conversion) {
  dpbyz::AccountantOptions opts;
  if (conversion == "classic") opts.conversion = dpbyz::RdpConversion::kClassic;
  const double sigma = dpbyz::solve_sigma(eps, delta, q, steps, opts);
  std::printf("%.6f\n", sigma);
  return kExitOk;
}

int cmd_partition(const std::string& dataset, std::size_t n, const std::string& mode,
                  bool summary, std::uint64_t seed, const std::string& data_root) {
  dpbyz::ExperimentConfig config;
  config.dataset = dataset;
  config.data_root = data_root;
  config.n_honest = n;
  config.partition = dpbyz::partition_mode_from_string(mode);
  config.seed = seed;
  config.aux_per_class = 0;
  config.aggregator = dpbyz::Aggregator::kNone;
  const auto data = dpbyz::prepare_data(config);
  const auto& plan = data.partition;
  std::printf("dataset=%s examples=%zu shards=%zu mode=%s disjoint=%s\n", dataset.c_str(),
              data.train->size(), plan.num_shards(), mode.c_str(),
              plan.is_disjoint(data.train->size()) ? "yes" : "no");
  if (!summary) return kExitOk;
  const int h = data.train->num_classes;
  std::printf("shard,size,tv_distance");
  for (int c = 0; c < h; ++c) std::printf(",class%d", c);
  std::printf("\n");
  for (std::size_t i = 0; i < plan.num_shards(); ++i) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(h), 0);
    for (std::size_t idx : plan.shards[i]) {
      ++counts[static_cast<std::size_t>(data.train->examples[idx].label)];
    }
    std::printf("%zu,%zu,%.4f", i, plan.shards[i].size(),
                dpbyz::label_tv_distance(*data.train, plan.shards[i]));
    for (std::size_t c : counts) std::printf(",%zu", c);
    std::printf("\n");
  }
  return kExitOk;
}

int cmd_aggbench(std::size_t n, std::size_t dim, int reps, std::uint64_t seed) {
  dpbyz::RngStream rng(seed, {dpbyz::StreamTag::kServer, 1, 0});
  const double sigma = 0.8;
  std::vector<dpbyz::ParamVector> uploads;
  for (std::size_t i = 0; i < n; ++i) uploads.push_back(dpbyz::gaussian_vector(rng, dim, sigma / 16));

  auto bench = [&](const char* name, auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (int r = 0; r < reps; ++r) sink += fn();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-18s %10.3f ms/call  (checksum %.6g)\n", name, ms / reps, sink);
  };
  std::printf("n=%zu dim=%zu reps=%d\n", n, dim, reps);
  bench("first_stage", [&] {
    double passed = 0;
    for (const auto& g : uploads) passed += dpbyz::first_stage_check(g, sigma, 16).passed();
    return passed;
  });
  bench("krum", [&] { return static_cast<double>(dpbyz::krum_index(uploads, 0.2)); });
  bench("rfa", [&] { return dpbyz::rfa_geometric_median(uploads)[0]; });
  bench("coordinate_median", [&] { return dpbyz::coordinate_median(uploads)[0]; });
  bench("trimmed_mean", [&] { return dpbyz::trimmed_mean(uploads, 0.2)[0]; });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private, Byzantine-resilient federated learning simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one experiment and write metrics");
  run->add_option("--config", run_args.config_path, "Config file")->required();
  run->add_option("--seed", run_args.seed, "Master seed (overrides the config)");
  run->add_option("--out", run_args.out_dir, "Output directory for metrics.jsonl and summary.csv");
  run->add_flag("--quiet", run_args.quiet, "No progress output");
  std::map<std::string, std::string> raw_overrides;
  for (const auto& key : dpbyz::config_keys()) {
    if (key.name == "seed") continue;
    run->add_option("--" + key.name, raw_overrides[key.name], key.help);
  }

  double eps = 0, delta = 0, q = 0;
  long steps = 0;
  std::string conversion = "tight";
  auto* sigma = app.add_subcommand("sigma", "Noise multiplier for an (epsilon, delta) budget");
  sigma->add_option("--eps", eps, "Target epsilon")->required()->check(CLI::PositiveNumber);
  sigma->add_option("--delta", delta, "Target delta")->required()->check(CLI::Range(0.0, 1.0));
  sigma->add_option("--q", q, "Sampling rate b_c/|D_i|")->required()->check(CLI::Range(0.0, 1.0));
  sigma->add_option("--T", steps, "Number of rounds")->required()->check(CLI::PositiveNumber);
  sigma->add_option("--conversion", conversion, "RDP to (eps, delta) conversion")
      ->check(CLI::IsMember({"tight", "classic"}));

  std::string dataset, mode = "iid", data_root;
  std::size_t n_workers = 0;
  bool summary = false;
  std::uint64_t part_seed = 1;
  auto* partition = app.add_subcommand("partition", "Partition a dataset across workers");
  partition->add_option("--dataset", dataset, "synthetic or a corpus name")->required();
  partition->add_option("--n", n_workers, "Worker count")->required()->check(CLI::PositiveNumber);
  partition->add_option("--mode", mode, "iid or non_iid")->check(CLI::IsMember({"iid", "non_iid"}));
  partition->add_flag("--summary", summary, "Per-shard label histograms");
  partition->add_option("--seed", part_seed, "Seed");
  partition->add_option("--data-root", data_root, "Dataset root (default $DPBYZ_DATA_ROOT)");

  std::size_t bench_n = 50, bench_dim = 25450;
  int bench_reps = 3;
  auto* aggbench = app.add_subcommand("aggbench", "Time the aggregators on random uploads");
  aggbench->add_option("--n", bench_n, "Upload count")->check(CLI::Range(4, 100000));
  aggbench->add_option("--dim", bench_dim, "Dimension")->check(CLI::Range(19, 100000000));
  aggbench->add_option("--reps", bench_reps, "Repetitions")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) {
      for (const auto& [key, value] : raw_overrides) {
        if (run->count("--" + key) > 0) run_args.overrides[key] = value;
      }
      return cmd_run(run_args);
    }
    if (*sigma) return cmd_sigma(eps, delta, q, steps, conversion);
    if (*partition) return cmd_partition(dataset, n_workers, mode, summary, part_seed, data_root);
    if (*aggbench) return cmd_aggbench(bench_n, bench_dim, bench_reps, 1);
  } catch (const dpbyz::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
