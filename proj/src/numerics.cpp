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

#include "dpbyz/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

void check_same_dim(const ParamVector& a, const ParamVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatchError("vector dimensions differ: " +
                                 std::to_string(a.dim()) + " vs " +
                                 std::to_string(b.dim()));
  }
}

}  // namespace

ParamVector& ParamVector::axpy(double alpha, const ParamVector& other) {
  check_same_dim(*this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * other.data_[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

void ParamVector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool ParamVector::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return x == 0.0; });
}

bool ParamVector::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
ParamVector operator*(double s, ParamVector v) { return v *= s; }

double squared_norm(const ParamVector& v) {
  double s = 0.0;
  for (double x : v.values()) s += x * x;
  return s;
}

double l2_norm(const ParamVector& v) { return std::sqrt(squared_norm(v)); }

double inner(const ParamVector& a, const ParamVector& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const ParamVector& a, const ParamVector& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

ParamVector sum_of(std::span<const ParamVector> vs) {
  if (vs.empty()) throw InvalidParameterError("sum_of: empty set");
  ParamVector out(vs.front().dim());
  for (const auto& v : vs) out += v;
  return out;
}

RngStream::RngStream(std::uint64_t master_seed, StreamId id) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(master_seed),
      static_cast<std::uint32_t>(master_seed >> 32),
      static_cast<std::uint32_t>(id.tag),
      static_cast<std::uint32_t>(id.a),
      static_cast<std::uint32_t>(id.a >> 32),
      static_cast<std::uint32_t>(id.b),
      static_cast<std::uint32_t>(id.b >> 32),
  };
  engine_.seed(seq);
}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

ParamVector gaussian_vector(RngStream& rng, std::size_t dim, double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw InvalidParameterError("gaussian_vector: sigma must be finite and >= 0");
  }
  ParamVector out(dim);
  if (sigma == 0.0) return out;
  for (double& x : out.values()) x = sigma * rng.normal();
  return out;
}

}  // namespace dpbyz
