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

// Dense parameter vectors and reproducible random streams.

#ifndef DPBYZ_NUMERICS_HPP_
#define DPBYZ_NUMERICS_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dpbyz {

// Flat vector holding a full model parameterization or a gradient. The
// dimension is fixed at construction; arithmetic never resizes.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim) : data_(dim, 0.0) {}
  explicit ParamVector(std::vector<double> values) : data_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : data_(values) {}

  std::size_t dim() const { return data_.size(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& raw() const { return data_; }

  // this += alpha * other.
  ParamVector& axpy(double alpha, const ParamVector& other);
  ParamVector& operator+=(const ParamVector& other) { return axpy(1.0, other); }
  ParamVector& operator-=(const ParamVector& other) { return axpy(-1.0, other); }
  ParamVector& operator*=(double s);

  void fill(double v);
  bool is_zero() const;
  bool all_finite() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> data_;
};

ParamVector operator+(ParamVector a, const ParamVector& b);
ParamVector operator-(ParamVector a, const ParamVector& b);
ParamVector operator*(double s, ParamVector v);

double l2_norm(const ParamVector& v);
double squared_norm(const ParamVector& v);
double inner(const ParamVector& a, const ParamVector& b);
double squared_distance(const ParamVector& a, const ParamVector& b);

// Sum of a nonempty set of equal-dimension vectors.
ParamVector sum_of(std::span<const ParamVector> vs);

// Identifies one independent random stream. Workers get (kWorker, worker,
// round); the server and data generators use reserved tags.
enum class StreamTag : std::uint32_t {
  kWorker = 1,
  kAttacker = 2,
  kServer = 3,
  kData = 4,
  kPartition = 5,
  kAuxiliary = 6,
  kTest = 7,
};

struct StreamId {
  StreamTag tag = StreamTag::kServer;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

// A reproducible random bit generator keyed by (master_seed, StreamId).
// Streams with equal keys produce identical sequences regardless of the
// order in which they are created or consumed.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  RngStream(std::uint64_t master_seed, StreamId id);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform();  // [0, 1)
  double normal();   // standard normal

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// i.i.d. N(0, sigma^2) entries. sigma == 0 yields the zero vector without
// consuming randomness.
ParamVector gaussian_vector(RngStream& rng, std::size_t dim, double sigma);

}  // namespace dpbyz

#endif  // DPBYZ_NUMERICS_HPP_
