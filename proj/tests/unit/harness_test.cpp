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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpbyz/config.hpp"
#include "dpbyz/errors.hpp"
#include "dpbyz/metrics.hpp"

namespace dpbyz {
namespace {

namespace fs = std::filesystem;

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.feature_dim = 20;
  c.hidden = 16;
  c.separation = 10.0;
  c.samples_per_worker = 64;
  c.test_samples = 200;
  c.validation_samples = 100;
  c.n_honest = 6;
  c.rounds = 12;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dpbyz_harness_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(ConfigTest, ParsesKeyValuesSectionsAndComments) {
  const auto c = parse_config(
      "# experiment\n"
      "[population]\n"
      "n_honest = 12\n"
      "n_byzantine = 5   # attackers\n"
      "attack = \"label_flip\"\n"
      "[server]\n"
      "aggregator = krum\n"
      "gamma = 0.25\n"
      "sigma = auto\n"
      "rounds = 30\n");
  EXPECT_EQ(c.n_honest, 12u);
  EXPECT_EQ(c.n_byzantine, 5u);
  EXPECT_EQ(c.attack.kind, AttackKind::kLabelFlip);
  EXPECT_EQ(c.aggregator, Aggregator::kKrum);
  EXPECT_DOUBLE_EQ(c.gamma, 0.25);
  EXPECT_FALSE(c.sigma.has_value());
  EXPECT_EQ(c.rounds, 30);
}

TEST(ConfigTest, DefaultsMatchProtocol) {
  const ExperimentConfig c;
  EXPECT_EQ(c.batch_size, 16u);
  EXPECT_DOUBLE_EQ(c.beta, 0.1);
  EXPECT_DOUBLE_EQ(c.base_eta, 0.2);
  EXPECT_EQ(c.aux_per_class, 2u);
  EXPECT_EQ(c.momentum_reset, MomentumReset::kOverwriteSlots);
  EXPECT_FALSE(c.clamp_scores);
}

TEST(ConfigTest, UnknownKeyIsError) {
  EXPECT_THROW(parse_config("n_honest = 3\nlearning_rate = 0.1\n"), ConfigError);
  ExperimentConfig c;
  EXPECT_THROW(apply_setting(c, "bogus", "1"), ConfigError);
}

TEST(ConfigTest, BadValuesAreErrors) {
  EXPECT_THROW(parse_config("n_honest = many\n"), ConfigError);
  EXPECT_THROW(parse_config("aggregator = bulyan\n"), ConfigError);
  EXPECT_THROW(parse_config("gamma\n"), ConfigError);
  ExperimentConfig c = tiny();
  c.gamma = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(ConfigTest, EveryKeyRoundTrips) {
  const ExperimentConfig c = tiny();
  for (const auto& key : config_keys()) {
    ExperimentConfig copy;
    apply_setting(copy, key.name, get_setting(c, key.name));
    EXPECT_EQ(get_setting(copy, key.name), get_setting(c, key.name)) << key.name;
  }
  EXPECT_EQ(canonical_text(parse_config(canonical_text(c))), canonical_text(c));
}

TEST(ConfigTest, HashTracksContent) {
  ExperimentConfig a = tiny(), b = tiny();
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(ConfigTest, MissingFileIsIoError) {
  EXPECT_THROW(load_config(scratch("missing") / "x.conf"), IoError);
}

TEST(HarnessTest, InfeasibleOptimizedAttackFailsBeforeRoundOne) {
  ExperimentConfig c = tiny();
  c.n_byzantine = 2;  // 2 <= sqrt(6)
  c.attack.kind = AttackKind::kOptimizedLocal;
  int rounds = 0;
  EXPECT_THROW(run_experiment(c, [&](const RoundTrace&) { ++rounds; }), InfeasibleError);
  EXPECT_EQ(rounds, 0);
}

TEST(HarnessTest, TracesHaveOneEntryPerRound) {
  ExperimentConfig c = tiny();
  c.n_byzantine = 4;
  c.attack.kind = AttackKind::kLabelFlip;
  const RunResult r = run_experiment(c);
  ASSERT_EQ(r.traces.size(), 12u);
  const std::size_t n = c.num_workers();
  const std::size_t k = static_cast<std::size_t>(std::ceil(c.gamma * n - 1e-12));
  for (std::size_t t = 0; t < r.traces.size(); ++t) {
    const auto& tr = r.traces[t];
    EXPECT_EQ(tr.round, static_cast<long>(t));
    EXPECT_EQ(tr.verdicts.size(), n);
    EXPECT_EQ(tr.scores.size(), n);
    EXPECT_EQ(tr.selected.size(), k);
  }
  EXPECT_EQ(r.byzantine, (std::vector<bool>{true, true, true, true, false, false, false, false,
                                            false, false}));
}

TEST(HarnessTest, EvaluationCadence) {
  ExperimentConfig c = tiny();
  c.rounds = 120;
  c.aggregator = Aggregator::kNone;
  const RunResult r = run_experiment(c);
  EXPECT_EQ(r.plan.eval_every, 3);
  for (const auto& tr : r.traces) {
    const bool expect = (tr.round + 1) % 3 == 0 || tr.round == 119;
    EXPECT_EQ(tr.accuracy.has_value(), expect) << tr.round;
  }
  EXPECT_TRUE(std::isfinite(r.final_accuracy()));
}

TEST(HarnessTest, PlanDerivesRoundsAndLearningRate) {
  ExperimentConfig c = tiny();
  c.rounds.reset();
  c.epochs = 2.5;
  c.sigma = 1.58;
  const auto data = prepare_data(c);
  const RunPlan plan = plan_run(c, data);
  EXPECT_EQ(plan.local_size, 64u);
  EXPECT_DOUBLE_EQ(plan.q, 0.25);
  EXPECT_EQ(plan.rounds, 10);  // ceil(2.5 * 64 / 16)
  EXPECT_NEAR(plan.eta, 0.1, 1e-15);
  EXPECT_NEAR(plan.delta, std::pow(64.0, -1.1), 1e-15);
}

TEST(HarnessTest, ZeroRoundsWritesEmptyFiles) {
  ExperimentConfig c = tiny();
  c.rounds = 0;
  const RunResult r = run_experiment(c);
  EXPECT_TRUE(r.traces.empty());
  EXPECT_TRUE(std::isnan(r.final_accuracy()));
  const fs::path dir = scratch("zero");
  emit_metrics(r, dir);
  EXPECT_EQ(slurp(dir / "metrics.jsonl"), "");
  EXPECT_EQ(slurp(dir / "summary.csv"), std::string(kSummaryCsvHeader) + "\n");
  fs::remove_all(dir);
}

TEST(HarnessTest, MetricsFilesAreDeterministic) {
  ExperimentConfig c = tiny();
  c.n_byzantine = 3;
  c.attack.kind = AttackKind::kGaussian;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  emit_metrics(run_experiment(c), a);
  emit_metrics(run_experiment(c), b);
  EXPECT_EQ(slurp(a / "metrics.jsonl"), slurp(b / "metrics.jsonl"));
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
  std::istringstream lines(slurp(a / "metrics.jsonl"));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    EXPECT_NE(line.find("\"rejected_first_stage\""), std::string::npos);
  }
  EXPECT_EQ(count, 12);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(HarnessTest, UnwritableOutputIsIoError) {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker).put('x');
  ExperimentConfig c = tiny();
  c.rounds = 1;
  EXPECT_THROW(emit_metrics(run_experiment(c), blocker / "sub"), IoError);
  fs::remove(blocker);
}

TEST(HarnessTest, SeedChangesTheRun) {
  ExperimentConfig c = tiny();
  const RunResult a = run_experiment(c);
  c.seed = 99;
  const RunResult b = run_experiment(c);
  EXPECT_NE(a.traces.back().scores, b.traces.back().scores);
}

TEST(MetricsTest, SelectionQuality) {
  std::vector<RoundTrace> traces(2);
  traces[0].selected = {2, 3};
  traces[1].selected = {0, 3};
  const std::vector<bool> byz = {true, true, false, false};
  const auto q = selection_quality(traces, byz);
  EXPECT_DOUBLE_EQ(q.precision, 0.75);
  EXPECT_DOUBLE_EQ(q.recall, 0.75);
}

TEST(MetricsTest, RoundJsonFields) {
  RoundTrace t;
  t.round = 4;
  t.selected = {1};
  t.scores = {0.5, 1.5};
  t.verdicts.resize(2);
  t.verdicts[1].norm_ok = true;
  t.verdicts[1].ks.pass = true;
  EXPECT_EQ(round_json(t),
            "{\"round\":4,\"accuracy\":null,\"selected\":[1],\"rejected_first_stage\":[0],"
            "\"scores\":[0.5,1.5]}");
  t.accuracy = 0.875;
  EXPECT_NE(round_json(t).find("\"accuracy\":0.875"), std::string::npos);
}

TEST(HarnessTest, SixtyPercentLabelFlipSelectsHonestWorkers) {
  ExperimentConfig c;
  c.feature_dim = 256;
  c.separation = 30.0;
  c.samples_per_worker = 400;
  c.n_honest = 20;
  c.n_byzantine = 30;
  c.attack.kind = AttackKind::kLabelFlip;
  c.rounds = 40;
  const RunResult r = run_experiment(c);
  int clean = 0, counted = 0;
  for (const auto& tr : r.traces) {
    if (tr.round < 5) continue;
    ++counted;
    bool all_honest = true;
    for (std::size_t i : tr.selected) all_honest = all_honest && !r.byzantine[i];
    if (all_honest) ++clean;
  }
  EXPECT_GE(clean, counted * 95 / 100);
}

}  // namespace
}  // namespace dpbyz
