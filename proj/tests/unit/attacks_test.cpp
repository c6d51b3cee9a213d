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

#include "dpbyz/attacks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "dpbyz/aggregation.hpp"
#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

WorkerState make_worker(std::shared_ptr<const Dataset> data, std::size_t dim,
                        std::size_t batch = 16) {
  WorkerState w;
  w.data = data;
  w.shard.resize(data->size());
  std::iota(w.shard.begin(), w.shard.end(), 0);
  w.momentum = MomentumList(batch, dim, 0.1);
  return w;
}

double cosine(const ParamVector& a, const ParamVector& b) {
  return inner(a, b) / (l2_norm(a) * l2_norm(b));
}

TEST(GaussianAttackTest, PassesFirstStageLikeHonestNoise) {
  RngStream rng(61, {StreamTag::kAttacker, 0, 0});
  int passed = 0;
  for (int t = 0; t < 1000; ++t) {
    if (first_stage_check(gaussian_attack(0.79, 25450, 16, rng), 0.79, 16).passed()) ++passed;
  }
  EXPECT_NEAR(passed / 1000.0, 0.997 * 0.95, 0.025);
}

TEST(GaussianAttackTest, ZeroMeanInnerProduct) {
  RngStream rng(62, {StreamTag::kAttacker, 0, 0});
  const std::size_t d = 2000;
  const ParamVector gs = gaussian_vector(rng, d, 1.0);
  const double sigma = 0.79, bc = 16.0;
  double sum = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) sum += inner(gaussian_attack(sigma, d, 16, rng), gs);
  const double se = sigma / bc * l2_norm(gs) / std::sqrt(static_cast<double>(trials));
  EXPECT_LT(std::abs(sum / trials), 3.0 * se);
}

TEST(GaussianAttackTest, ZeroSigmaIsRejected) {
  RngStream rng(63, {StreamTag::kAttacker, 0, 0});
  const ParamVector g = gaussian_attack(0.0, 100, 16, rng);
  EXPECT_TRUE(g.is_zero());
  EXPECT_FALSE(first_stage_check(g, 0.79, 16).norm_ok);
}

TEST(LabelFlipTest, FlipFormula) {
  EXPECT_EQ(flip_label(3, 10), 6);
  EXPECT_EQ(flip_label(0, 10), 9);
  EXPECT_EQ(flip_label(5, 11), 5);
}

TEST(LabelFlipTest, FixedPointMatchesHonestUpload) {
  const LayerSizes s{8, 5, 11};
  auto data = std::make_shared<Dataset>();
  data->num_classes = 11;
  RngStream gen(64, {StreamTag::kData, 0, 0});
  for (int i = 0; i < 40; ++i) {
    Example x;
    for (std::size_t f = 0; f < s.input; ++f) x.features.push_back(gen.normal());
    x.label = 5;
    data->examples.push_back(x);
  }
  RngStream init(64, {StreamTag::kServer, 0, 0});
  const MlpModel model = MlpModel::initialized(s, init);
  WorkerState honest = make_worker(data, s.param_count());
  WorkerState flipper = make_worker(data, s.param_count());
  for (std::uint64_t t = 0; t < 3; ++t) {
    RngStream a(65, {StreamTag::kWorker, 0, t}), b(65, {StreamTag::kWorker, 0, t});
    EXPECT_EQ(honest_upload(honest, model, 0.5, a), label_flip_attack(flipper, model, 0.5, b));
  }
}

TEST(LabelFlipTest, DiffersFromHonestWhenLabelsMove) {
  const LayerSizes s{8, 5, 10};
  RngStream gen(66, {StreamTag::kData, 0, 0});
  auto data = std::make_shared<const Dataset>(synthetic_classes(64, 10, s.input, 3.0, gen));
  RngStream init(66, {StreamTag::kServer, 0, 0});
  const MlpModel model = MlpModel::initialized(s, init);
  WorkerState honest = make_worker(data, s.param_count());
  WorkerState flipper = make_worker(data, s.param_count());
  RngStream a(67, {StreamTag::kWorker, 0, 0}), b(67, {StreamTag::kWorker, 0, 0});
  EXPECT_NE(honest_upload(honest, model, 0.0, a), label_flip_attack(flipper, model, 0.0, b));
}

TEST(OptimizedAttackTest, WorkedExample) {
  RngStream rng(68, {StreamTag::kTest, 0, 0});
  const ParamVector u = gaussian_vector(rng, 7, 1.0);
  const std::vector<ParamVector> benign(9, u);
  EXPECT_NEAR(optimized_attack_lambda(9, 4), 1.0 / 3.0, 1e-15);
  const auto mal = optimized_attack(benign, 4);
  ASSERT_EQ(mal.size(), 4u);
  for (const auto& m : mal) {
    for (std::size_t i = 0; i < u.dim(); ++i) EXPECT_NEAR(m[i], -3.0 * u[i], 1e-13);
  }
  const ParamVector total = sum_of(mal);
  for (std::size_t i = 0; i < u.dim(); ++i) EXPECT_NEAR(total[i], -12.0 * u[i], 1e-12);
}

TEST(OptimizedAttackTest, AggregateIsAntiParallel) {
  RngStream rng(69, {StreamTag::kTest, 0, 0});
  for (int t = 0; t < 50; ++t) {
    const std::size_t b = 2 + rng() % 30;
    const std::size_t m = static_cast<std::size_t>(std::floor(std::sqrt(b))) + 1 + rng() % 20;
    std::vector<ParamVector> benign;
    for (std::size_t i = 0; i < b; ++i) benign.push_back(gaussian_vector(rng, 50, 1.0));
    const auto mal = optimized_attack(benign, m);
    const ParamVector sum_b = sum_of(benign);
    const ParamVector all = sum_of(mal) + sum_b;
    EXPECT_NEAR(cosine(all, sum_b), -1.0, 1e-10);
    const double lam = optimized_attack_lambda(b, m);
    EXPECT_NEAR(l2_norm(all), lam * l2_norm(sum_b), 1e-9 * l2_norm(sum_b));
  }
}

TEST(OptimizedAttackTest, InfeasibleWhenTooFewAttackers) {
  const std::vector<ParamVector> benign(9, ParamVector{1.0});
  EXPECT_THROW(optimized_attack(benign, 3), InfeasibleError);
  EXPECT_THROW(optimized_attack(benign, 0), InfeasibleError);
  EXPECT_NO_THROW(optimized_attack(benign, 4));
  EXPECT_THROW(check_optimized_attack_feasible(20, 4), InfeasibleError);
  EXPECT_NO_THROW(check_optimized_attack_feasible(20, 5));
}

TEST(OptimizedAttackTest, PureNoiseUploadsStayStealthy) {
  // With signal-free benign uploads the malicious vector is again
  // N(0, (sigma / b_c)^2 I) in distribution.
  RngStream rng(70, {StreamTag::kTest, 0, 0});
  int passed = 0;
  for (int t = 0; t < 400; ++t) {
    std::vector<ParamVector> benign;
    for (int i = 0; i < 20; ++i) benign.push_back(gaussian_vector(rng, 25450, 0.79 / 16.0));
    if (first_stage_check(optimized_attack(benign, 30).front(), 0.79, 16).passed()) ++passed;
  }
  EXPECT_NEAR(passed / 400.0, 0.997 * 0.95, 0.035);
}

TEST(TtbbTest, FirstMaliciousRound) {
  EXPECT_EQ(first_malicious_round(0.0, 100), 0);
  EXPECT_EQ(first_malicious_round(0.5, 100), 50);
  EXPECT_EQ(first_malicious_round(1.0, 100), 100);
  EXPECT_EQ(first_malicious_round(0.2, 37), 8);
  EXPECT_THROW(first_malicious_round(1.5, 10), InvalidParameterError);
}

TEST(TtbbTest, AdaptiveWrap) {
  const ParamVector copy{1.0}, bad{-1.0};
  const auto malicious = [&] { return bad; };
  AttackSpec spec;
  spec.kind = AttackKind::kGaussian;
  spec.ttbb = 0.0;
  for (long r = 0; r < 10; ++r) EXPECT_EQ(adaptive_wrap(spec, r, 10, malicious, copy), bad);
  spec.ttbb = 1.0;
  for (long r = 0; r < 10; ++r) EXPECT_EQ(adaptive_wrap(spec, r, 10, malicious, copy), copy);
  spec.ttbb = 0.5;
  EXPECT_EQ(adaptive_wrap(spec, 49, 100, malicious, copy), copy);
  EXPECT_EQ(adaptive_wrap(spec, 50, 100, malicious, copy), bad);
}

TEST(LittleAttackTest, RejectedByFirstStage) {
  RngStream rng(71, {StreamTag::kTest, 0, 0});
  const std::size_t d = 25450;
  const ParamVector direction = gaussian_vector(rng, d, 1.0 / std::sqrt(25450.0));
  int rejected = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<ParamVector> benign;
    for (int i = 0; i < 20; ++i) {
      ParamVector g = gaussian_vector(rng, d, 0.79 / 16.0);
      g.axpy(1.0 / 16.0, direction);
      benign.push_back(std::move(g));
    }
    if (!first_stage_check(little_attack(benign, 1.0), 0.79, 16).passed()) ++rejected;
  }
  EXPECT_GE(rejected, 99);
}

}  // namespace
}  // namespace dpbyz
