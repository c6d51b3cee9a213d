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

// Dataset sources, worker partitioning and auxiliary-set sampling.

#ifndef DPBYZ_DATA_HPP_
#define DPBYZ_DATA_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dpbyz/model.hpp"
#include "dpbyz/numerics.hpp"

namespace dpbyz {

struct Dataset {
  std::vector<Example> examples;
  int num_classes = 0;
  std::string name;

  std::size_t size() const { return examples.size(); }
  std::size_t feature_dim() const {
    return examples.empty() ? 0 : examples.front().features.size();
  }
  // Throws InvalidParameterError if empty, ragged, or a label is out of range.
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
  std::vector<std::size_t> class_counts() const;
};

// Disjoint index sets, one per worker.
struct PartitionPlan {
  std::vector<std::vector<std::size_t>> shards;

  std::size_t num_shards() const { return shards.size(); }
  // Pairwise disjoint and every index < dataset_size.
  bool is_disjoint(std::size_t dataset_size) const;
  std::size_t total_size() const;
};

// H isotropic Gaussian blobs: class c has mean separation * u_c for a random
// unit direction u_c and identity covariance. Labels cycle 0..H-1.
Dataset synthetic_classes(std::size_t n_samples, int num_classes, std::size_t feature_dim,
                          double separation, RngStream& rng);

// Same blobs as synthetic_classes for a given direction seed, but with sample
// noise drawn from `sample_rng`; lets train/test/validation splits share
// class means.
struct BlobSpec {
  int num_classes = 10;
  std::size_t feature_dim = 784;
  double separation = 4.0;
  std::vector<std::vector<double>> means;

  static BlobSpec make(int num_classes, std::size_t feature_dim, double separation,
                       RngStream& rng);
  Dataset sample(std::size_t n_samples, RngStream& rng, std::string name) const;
};

// Reads an IDX image/label pair (MNIST family). Pixels are scaled to [0,1].
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::string name = "idx");

// Loads <root>/<name>/{train,test}-{images,labels}; `split` is "train" or "test".
Dataset load_idx_split(const std::filesystem::path& root, const std::string& name,
                       const std::string& split);

PartitionPlan partition_iid(const Dataset& dataset, std::size_t n, RngStream& rng);

// Per-class random proportions, contiguous per-class splits, then the
// concatenated list is re-chunked into n slices of ceil(|L|/n).
PartitionPlan get_non_iid(const Dataset& dataset, std::size_t n, RngStream& rng);

// Exactly per_class examples of each class, drawn without replacement.
Dataset sample_auxiliary(const Dataset& validation, std::size_t per_class, RngStream& rng);

// Total-variation distance between a shard's label distribution and the
// full dataset's.
double label_tv_distance(const Dataset& dataset, const std::vector<std::size_t>& shard);

}  // namespace dpbyz

#endif  // DPBYZ_DATA_HPP_
