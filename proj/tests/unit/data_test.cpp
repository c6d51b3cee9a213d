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

#include "dpbyz/data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("dpbyz_data_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_images(const fs::path& p, std::uint32_t magic, std::uint32_t n, std::uint32_t rows,
                  std::uint32_t cols, std::size_t pixel_bytes) {
  std::ofstream out(p, std::ios::binary);
  put_u32(out, magic);
  put_u32(out, n);
  put_u32(out, rows);
  put_u32(out, cols);
  for (std::size_t i = 0; i < pixel_bytes; ++i) out.put(static_cast<char>(i % 256));
}

void write_labels(const fs::path& p, std::uint32_t magic, std::uint32_t n,
                  const std::vector<unsigned char>& labels) {
  std::ofstream out(p, std::ios::binary);
  put_u32(out, magic);
  put_u32(out, n);
  for (unsigned char l : labels) out.put(static_cast<char>(l));
}

// Plain minibatch SGD on the full dataset; returns the trained model.
MlpModel train_sgd(const Dataset& train, LayerSizes s, int epochs, double eta, RngStream& rng) {
  MlpModel model = MlpModel::initialized(s, rng);
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t start = 0; start < idx.size(); start += 32) {
      std::vector<Example> batch;
      for (std::size_t k = start; k < std::min(start + 32, idx.size()); ++k) {
        batch.push_back(train.examples[idx[k]]);
      }
      model.mutable_params().axpy(-eta, model.batch_gradient(batch));
    }
  }
  return model;
}

TEST(SyntheticTest, ShapeAndDeterminism) {
  RngStream a(81, {StreamTag::kData, 0, 0}), b(81, {StreamTag::kData, 0, 0});
  const Dataset x = synthetic_classes(500, 10, 12, 4.0, a);
  const Dataset y = synthetic_classes(500, 10, 12, 4.0, b);
  EXPECT_EQ(x.size(), 500u);
  EXPECT_EQ(x.feature_dim(), 12u);
  EXPECT_EQ(x.num_classes, 10);
  EXPECT_NO_THROW(x.validate());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x.examples[i].features, y.examples[i].features);
    EXPECT_EQ(x.examples[i].label, y.examples[i].label);
  }
}

TEST(SyntheticTest, ZeroSeparationIsUninformative) {
  RngStream rng(82, {StreamTag::kData, 0, 0});
  const BlobSpec spec = BlobSpec::make(10, 20, 0.0, rng);
  const Dataset train = spec.sample(2000, rng, "train");
  const Dataset test = spec.sample(10000, rng, "test");
  const MlpModel model = train_sgd(train, {20, 32, 10}, 5, 0.1, rng);
  EXPECT_NEAR(model.evaluate(test.examples), 0.1, 0.03);
}

TEST(SyntheticTest, LargeSeparationIsLearnable) {
  RngStream rng(83, {StreamTag::kData, 0, 0});
  const BlobSpec spec = BlobSpec::make(2, 20, 10.0, rng);
  const Dataset train = spec.sample(1000, rng, "train");
  const Dataset test = spec.sample(2000, rng, "test");
  const MlpModel model = train_sgd(train, {20, 16, 2}, 3, 0.1, rng);
  EXPECT_GE(model.evaluate(test.examples), 0.99);
}

TEST(SyntheticTest, RejectsBadArguments) {
  RngStream rng(84, {StreamTag::kData, 0, 0});
  EXPECT_THROW(synthetic_classes(0, 10, 5, 1.0, rng), InvalidParameterError);
  EXPECT_THROW(synthetic_classes(10, 1, 5, 1.0, rng), InvalidParameterError);
  EXPECT_THROW(synthetic_classes(10, 10, 5, -1.0, rng), InvalidParameterError);
}

TEST(IdxTest, ParsesWellFormedFiles) {
  TempDir dir;
  write_images(dir.path() / "img", 0x803, 3, 2, 2, 12);
  write_labels(dir.path() / "lab", 0x801, 3, {0, 4, 2});
  const Dataset ds = load_idx(dir.path() / "img", dir.path() / "lab");
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.feature_dim(), 4u);
  EXPECT_EQ(ds.num_classes, 5);
  EXPECT_EQ(ds.examples[1].label, 4);
  EXPECT_DOUBLE_EQ(ds.examples[1].features[0], 4.0 / 255.0);
  for (const auto& x : ds.examples) {
    for (double f : x.features) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

TEST(IdxTest, EmptyFileIsTruncated) {
  TempDir dir;
  std::ofstream(dir.path() / "img").close();
  write_labels(dir.path() / "lab", 0x801, 1, {0});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lab"), TruncatedFileError);
}

TEST(IdxTest, ShortPixelDataIsTruncated) {
  TempDir dir;
  write_images(dir.path() / "img", 0x803, 3, 2, 2, 11);
  write_labels(dir.path() / "lab", 0x801, 3, {0, 1, 2});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lab"), TruncatedFileError);
}

TEST(IdxTest, LabelsWithImageMagicIsWrongMagic) {
  TempDir dir;
  write_images(dir.path() / "img", 0x803, 1, 1, 1, 1);
  write_labels(dir.path() / "lab", 0x803, 1, {0});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lab"), WrongMagicError);
}

TEST(IdxTest, CountMismatch) {
  TempDir dir;
  write_images(dir.path() / "img", 0x803, 2, 1, 1, 2);
  write_labels(dir.path() / "lab", 0x801, 3, {0, 1, 1});
  EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lab"), CountMismatchError);
}

TEST(IdxTest, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(load_idx(dir.path() / "nope", dir.path() / "nope2"), IoError);
}

TEST(IdxTest, MnistTrainSplitIfPresent) {
  const char* root = std::getenv("DPBYZ_DATA_ROOT");
  if (root == nullptr || !fs::exists(fs::path(root) / "mnist")) {
    GTEST_SKIP() << "MNIST not available under DPBYZ_DATA_ROOT";
  }
  const Dataset ds = load_idx_split(root, "mnist", "train");
  EXPECT_EQ(ds.size(), 60000u);
  EXPECT_EQ(ds.num_classes, 10);
  EXPECT_EQ(ds.feature_dim(), 784u);
}

class PartitionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    RngStream rng(85, {StreamTag::kData, 0, 0});
    data_ = synthetic_classes(60000, 10, 2, 1.0, rng);
  }
  Dataset data_;
};

TEST_F(PartitionTest, IidSingleShardIsEverything) {
  RngStream rng(86, {StreamTag::kPartition, 0, 0});
  const auto plan = partition_iid(data_, 1, rng);
  ASSERT_EQ(plan.num_shards(), 1u);
  EXPECT_EQ(plan.shards[0].size(), data_.size());
  EXPECT_TRUE(plan.is_disjoint(data_.size()));
}

TEST_F(PartitionTest, IidShardsAreBalanced) {
  RngStream rng(87, {StreamTag::kPartition, 0, 0});
  const auto plan = partition_iid(data_, 7, rng);
  std::size_t lo = data_.size(), hi = 0;
  for (const auto& s : plan.shards) {
    lo = std::min(lo, s.size());
    hi = std::max(hi, s.size());
  }
  EXPECT_LE(hi - lo, 1u);
  EXPECT_EQ(plan.total_size(), data_.size());
  EXPECT_TRUE(plan.is_disjoint(data_.size()));
}

TEST_F(PartitionTest, IidLabelHistogramsTrackGlobal) {
  RngStream rng(88, {StreamTag::kPartition, 0, 0});
  const auto plan = partition_iid(data_, 20, rng);
  const auto global = data_.class_counts();
  int cells = 0, inside = 0;
  for (const auto& shard : plan.shards) {
    std::vector<double> local(10, 0.0);
    for (std::size_t i : shard) local[static_cast<std::size_t>(data_.examples[i].label)] += 1.0;
    const double m = static_cast<double>(shard.size());
    for (std::size_t c = 0; c < 10; ++c) {
      const double p = static_cast<double>(global[c]) / static_cast<double>(data_.size());
      const double se = std::sqrt(p * (1.0 - p) / m);
      ++cells;
      if (std::abs(local[c] / m - p) <= 3.0 * se) ++inside;
    }
  }
  EXPECT_GE(inside, cells * 99 / 100);
}

TEST_F(PartitionTest, IidTooManyWorkers) {
  RngStream rng(89, {StreamTag::kPartition, 0, 0});
  const Dataset tiny = data_.subset({0, 1, 2});
  EXPECT_THROW(partition_iid(tiny, 4, rng), InvalidParameterError);
  EXPECT_THROW(partition_iid(tiny, 0, rng), InvalidParameterError);
}

TEST_F(PartitionTest, NonIidSingleShard) {
  RngStream rng(90, {StreamTag::kPartition, 0, 0});
  const auto plan = get_non_iid(data_, 1, rng);
  ASSERT_EQ(plan.num_shards(), 1u);
  EXPECT_EQ(plan.shards[0].size(), data_.size());
}

TEST_F(PartitionTest, NonIidIsADisjointCoverWithAlgorithmShardSizes) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::size_t n : {3u, 20u, 33u}) {
      RngStream rng(seed, {StreamTag::kPartition, 0, 0});
      const auto plan = get_non_iid(data_, n, rng);
      EXPECT_TRUE(plan.is_disjoint(data_.size()));
      EXPECT_EQ(plan.total_size(), data_.size());
      const std::size_t s = (data_.size() + n - 1) / n;
      for (std::size_t i = 0; i + 1 < n; ++i) EXPECT_EQ(plan.shards[i].size(), s);
    }
  }
}

TEST_F(PartitionTest, NonIidSkewsSomeShard) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngStream rng(seed, {StreamTag::kPartition, 0, 0});
    const auto plan = get_non_iid(data_, 20, rng);
    double worst = 0.0;
    for (const auto& shard : plan.shards) worst = std::max(worst, label_tv_distance(data_, shard));
    EXPECT_GT(worst, 0.1) << "seed " << seed;
  }
}

TEST(PartitionFuzzTest, DisjointCoverForEveryCase) {
  RngStream gen(91, {StreamTag::kTest, 0, 0});
  for (int t = 0; t < 60; ++t) {
    const std::size_t size = 5 + gen() % 400;
    const std::size_t n = 1 + gen() % std::min<std::size_t>(size, 40);
    const Dataset ds = synthetic_classes(size, 2 + static_cast<int>(gen() % 9), 1, 1.0, gen);
    RngStream a(gen(), {StreamTag::kPartition, 0, 0}), b(gen(), {StreamTag::kPartition, 0, 0});
    const auto iid = partition_iid(ds, n, a);
    const auto non = get_non_iid(ds, n, b);
    EXPECT_TRUE(iid.is_disjoint(size));
    EXPECT_EQ(iid.total_size(), size);
    EXPECT_TRUE(non.is_disjoint(size));
    EXPECT_EQ(non.total_size(), size);
  }
}

TEST(AuxiliaryTest, ExactlyPerClass) {
  RngStream rng(92, {StreamTag::kData, 0, 0});
  const Dataset validation = synthetic_classes(1000, 10, 4, 1.0, rng);
  RngStream a(93, {StreamTag::kAuxiliary, 0, 0}), b(93, {StreamTag::kAuxiliary, 0, 0});
  const Dataset aux = sample_auxiliary(validation, 2, a);
  EXPECT_EQ(aux.size(), 20u);
  for (std::size_t c : aux.class_counts()) EXPECT_EQ(c, 2u);
  const Dataset again = sample_auxiliary(validation, 2, b);
  for (std::size_t i = 0; i < aux.size(); ++i) {
    EXPECT_EQ(aux.examples[i].features, again.examples[i].features);
  }
  std::set<std::vector<double>> distinct;
  for (const auto& x : aux.examples) distinct.insert(x.features);
  EXPECT_EQ(distinct.size(), 20u);
}

TEST(AuxiliaryTest, ZeroPerClassIsEmpty) {
  RngStream rng(94, {StreamTag::kData, 0, 0});
  const Dataset validation = synthetic_classes(100, 10, 4, 1.0, rng);
  EXPECT_EQ(sample_auxiliary(validation, 0, rng).size(), 0u);
}

TEST(AuxiliaryTest, InsufficientSupport) {
  RngStream rng(95, {StreamTag::kData, 0, 0});
  const Dataset validation = synthetic_classes(30, 10, 4, 1.0, rng);
  EXPECT_THROW(sample_auxiliary(validation, 50, rng), InvalidParameterError);
}

}  // namespace
}  // namespace dpbyz
