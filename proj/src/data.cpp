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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

class BigEndianReader {
 public:
  BigEndianReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  const unsigned char* take(std::size_t n) {
    need(n);
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw TruncatedFileError(path_.string() + ": truncated IDX file (need " +
                               std::to_string(pos_ + n) + " bytes, have " +
                               std::to_string(bytes_.size()) + ")");
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

void expect_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "0x%08x, expected 0x%08x", got, want);
    throw WrongMagicError(path.string() + ": wrong IDX magic " + buf);
  }
}

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    groups[static_cast<std::size_t>(ds.examples[i].label)].push_back(i);
  }
  return groups;
}

// Splits `total` into parts proportional to `weights` (summing to 1) with
// largest-remainder rounding; ties go to the lower index.
std::vector<std::size_t> proportional_counts(std::size_t total, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> counts(n);
  std::vector<double> rem(n);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = weights[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(counts[i]);
    used += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++counts[order[k % n]];
  return counts;
}

}  // namespace

void Dataset::validate() const {
  if (examples.empty()) throw InvalidParameterError("dataset '" + name + "' is empty");
  const std::size_t dim = feature_dim();
  for (const auto& x : examples) {
    if (x.features.size() != dim) throw InvalidParameterError("dataset '" + name + "' is ragged");
    if (x.label < 0 || x.label >= num_classes) {
      throw InvalidParameterError("dataset '" + name + "' has label " + std::to_string(x.label) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.name = name;
  out.examples.reserve(indices.size());
  for (std::size_t i : indices) out.examples.push_back(examples.at(i));
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& x : examples) ++counts[static_cast<std::size_t>(x.label)];
  return counts;
}

bool PartitionPlan::is_disjoint(std::size_t dataset_size) const {
  std::vector<bool> seen(dataset_size, false);
  for (const auto& shard : shards) {
    for (std::size_t i : shard) {
      if (i >= dataset_size || seen[i]) return false;
      seen[i] = true;
    }
  }
  return true;
}

std::size_t PartitionPlan::total_size() const {
  std::size_t s = 0;
  for (const auto& shard : shards) s += shard.size();
  return s;
}

BlobSpec BlobSpec::make(int num_classes, std::size_t feature_dim, double separation,
                        RngStream& rng) {
  if (num_classes < 2 || feature_dim == 0 || separation < 0.0) {
    throw InvalidParameterError("synthetic blobs need H >= 2, feature_dim >= 1, separation >= 0");
  }
  BlobSpec spec;
  spec.num_classes = num_classes;
  spec.feature_dim = feature_dim;
  spec.separation = separation;
  for (int c = 0; c < num_classes; ++c) {
    ParamVector u = gaussian_vector(rng, feature_dim, 1.0);
    const double n = l2_norm(u);
    u *= separation / n;
    spec.means.push_back(u.raw());
  }
  return spec;
}

Dataset BlobSpec::sample(std::size_t n_samples, RngStream& rng, std::string name) const {
  Dataset ds;
  ds.num_classes = num_classes;
  ds.name = std::move(name);
  ds.examples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Example x;
    x.label = static_cast<int>(i % static_cast<std::size_t>(num_classes));
    const auto& mu = means[static_cast<std::size_t>(x.label)];
    x.features.resize(feature_dim);
    for (std::size_t j = 0; j < feature_dim; ++j) x.features[j] = mu[j] + rng.normal();
    ds.examples.push_back(std::move(x));
  }
  return ds;
}

Dataset synthetic_classes(std::size_t n_samples, int num_classes, std::size_t feature_dim,
                          double separation, RngStream& rng) {
  if (n_samples == 0) throw InvalidParameterError("synthetic_classes: n_samples must be >= 1");
  const BlobSpec spec = BlobSpec::make(num_classes, feature_dim, separation, rng);
  return spec.sample(n_samples, rng, "synthetic");
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::string name) {
  const auto image_bytes = read_file(images_path);
  const auto label_bytes = read_file(labels_path);

  BigEndianReader img(image_bytes, images_path);
  expect_magic(img.u32(), kIdxImagesMagic, images_path);
  const std::uint32_t n_images = img.u32();
  const std::uint32_t rows = img.u32();
  const std::uint32_t cols = img.u32();

  BigEndianReader lab(label_bytes, labels_path);
  expect_magic(lab.u32(), kIdxLabelsMagic, labels_path);
  const std::uint32_t n_labels = lab.u32();

  if (n_images != n_labels) {
    throw CountMismatchError(images_path.string() + " has " + std::to_string(n_images) +
                             " images but " + labels_path.string() + " has " +
                             std::to_string(n_labels) + " labels");
  }

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const unsigned char* px = img.take(pixels * n_images);
  const unsigned char* lb = lab.take(n_labels);

  Dataset ds;
  ds.name = std::move(name);
  ds.examples.resize(n_images);
  int max_label = 0;
  for (std::size_t i = 0; i < n_images; ++i) {
    auto& x = ds.examples[i];
    x.features.resize(pixels);
    for (std::size_t j = 0; j < pixels; ++j) x.features[j] = px[i * pixels + j] / 255.0;
    x.label = lb[i];
    max_label = std::max(max_label, x.label);
  }
  ds.num_classes = std::max(max_label + 1, 2);
  return ds;
}

Dataset load_idx_split(const std::filesystem::path& root, const std::string& name,
                       const std::string& split) {
  const auto dir = root / name;
  auto pick = [&](const std::string& kind, const char* idx_suffix) {
    const auto plain = dir / (split + "-" + kind);
    if (std::filesystem::exists(plain)) return plain;
    const auto alt = dir / (split + "-" + kind + idx_suffix);
    if (std::filesystem::exists(alt)) return alt;
    return plain;
  };
  return load_idx(pick("images", "-idx3-ubyte"), pick("labels", "-idx1-ubyte"),
                  name + "/" + split);
}

PartitionPlan partition_iid(const Dataset& dataset, std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidParameterError("partition_iid: n must be >= 1");
  if (n > dataset.size()) {
    throw InvalidParameterError("partition_iid: more workers (" + std::to_string(n) +
                                ") than examples (" + std::to_string(dataset.size()) + ")");
  }
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  PartitionPlan plan;
  plan.shards.resize(n);
  const std::size_t base = idx.size() / n, extra = idx.size() % n;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    plan.shards[i].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                          idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return plan;
}

PartitionPlan get_non_iid(const Dataset& dataset, std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidParameterError("get_non_iid: n must be >= 1");
  const auto groups = indices_by_class(dataset);
  std::vector<std::vector<std::size_t>> per_worker(n);
  for (const auto& group : groups) {
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) {
      x = rng.uniform();
      total += x;
    }
    for (double& x : v) x /= total;
    const auto counts = proportional_counts(group.size(), v);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      per_worker[i].insert(per_worker[i].end(), group.begin() + static_cast<std::ptrdiff_t>(pos),
                           group.begin() + static_cast<std::ptrdiff_t>(pos + counts[i]));
      pos += counts[i];
    }
  }
  std::vector<std::size_t> all;
  for (const auto& t : per_worker) all.insert(all.end(), t.begin(), t.end());

  const std::size_t s = (all.size() + n - 1) / n;
  PartitionPlan plan;
  plan.shards.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = std::min(i * s, all.size());
    const std::size_t end = std::min(begin + s, all.size());
    plan.shards[i].assign(all.begin() + static_cast<std::ptrdiff_t>(begin),
                          all.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return plan;
}

Dataset sample_auxiliary(const Dataset& validation, std::size_t per_class, RngStream& rng) {
  const auto groups = indices_by_class(validation);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < per_class) {
      throw InvalidParameterError("sample_auxiliary: class " + std::to_string(c) + " has only " +
                                  std::to_string(groups[c].size()) + " examples, need " +
                                  std::to_string(per_class));
    }
    std::sample(groups[c].begin(), groups[c].end(), std::back_inserter(chosen), per_class, rng);
  }
  Dataset aux = validation.subset(chosen);
  aux.name = validation.name + "/aux";
  return aux;
}

double label_tv_distance(const Dataset& dataset, const std::vector<std::size_t>& shard) {
  if (shard.empty() || dataset.size() == 0) return 0.0;
  const auto global = dataset.class_counts();
  std::vector<double> local(global.size(), 0.0);
  for (std::size_t i : shard) local[static_cast<std::size_t>(dataset.examples[i].label)] += 1.0;
  double tv = 0.0;
  for (std::size_t c = 0; c < global.size(); ++c) {
    tv += std::abs(local[c] / static_cast<double>(shard.size()) -
                   static_cast<double>(global[c]) / static_cast<double>(dataset.size()));
  }
  return 0.5 * tv;
}

}  // namespace dpbyz
