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

#include "dpbyz/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

struct Offsets {
  std::size_t w1, b1, w2, b2;
};

Offsets offsets(const LayerSizes& s) {
  Offsets o{};
  o.w1 = 0;
  o.b1 = s.hidden * s.input;
  o.w2 = o.b1 + s.hidden;
  o.b2 = o.w2 + s.classes * s.hidden;
  return o;
}

// Numerically stable in-place softmax.
void softmax(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

MlpWeights unflatten(const LayerSizes& sizes, const ParamVector& v) {
  if (v.dim() != sizes.param_count()) {
    throw DimensionMismatchError("unflatten: vector has " + std::to_string(v.dim()) +
                                 " entries, layer sizes need " +
                                 std::to_string(sizes.param_count()));
  }
  const Offsets o = offsets(sizes);
  const auto p = v.values();
  MlpWeights w;
  w.w1.assign(p.begin() + o.w1, p.begin() + o.b1);
  w.b1.assign(p.begin() + o.b1, p.begin() + o.w2);
  w.w2.assign(p.begin() + o.w2, p.begin() + o.b2);
  w.b2.assign(p.begin() + o.b2, p.end());
  return w;
}

ParamVector flatten(const LayerSizes& sizes, const MlpWeights& w) {
  if (w.w1.size() != sizes.hidden * sizes.input || w.b1.size() != sizes.hidden ||
      w.w2.size() != sizes.classes * sizes.hidden || w.b2.size() != sizes.classes) {
    throw DimensionMismatchError("flatten: weight blocks do not match layer sizes");
  }
  std::vector<double> out;
  out.reserve(sizes.param_count());
  for (const auto* block : {&w.w1, &w.b1, &w.w2, &w.b2}) {
    out.insert(out.end(), block->begin(), block->end());
  }
  return ParamVector(std::move(out));
}

MlpModel::MlpModel(LayerSizes sizes) : sizes_(sizes), params_(sizes.param_count()) {
  if (sizes.input == 0 || sizes.hidden == 0 || sizes.classes < 2) {
    throw InvalidParameterError("MlpModel: need input, hidden >= 1 and classes >= 2");
  }
}

MlpModel::MlpModel(LayerSizes sizes, ParamVector params) : MlpModel(sizes) {
  set_params(std::move(params));
}

MlpModel MlpModel::initialized(LayerSizes sizes, RngStream& rng) {
  MlpModel m(sizes);
  const Offsets o = offsets(sizes);
  auto p = m.params_.values();
  const double a1 = std::sqrt(6.0 / static_cast<double>(sizes.input + sizes.hidden));
  const double a2 = std::sqrt(6.0 / static_cast<double>(sizes.hidden + sizes.classes));
  for (std::size_t i = o.w1; i < o.b1; ++i) p[i] = a1 * (2.0 * rng.uniform() - 1.0);
  for (std::size_t i = o.w2; i < o.b2; ++i) p[i] = a2 * (2.0 * rng.uniform() - 1.0);
  return m;
}

void MlpModel::set_params(ParamVector params) {
  if (params.dim() != sizes_.param_count()) {
    throw DimensionMismatchError("set_params: expected " +
                                 std::to_string(sizes_.param_count()) + " entries, got " +
                                 std::to_string(params.dim()));
  }
  params_ = std::move(params);
}

void MlpModel::check_example(std::span<const double> features, int label) const {
  if (features.size() != sizes_.input) {
    throw DimensionMismatchError("example has " + std::to_string(features.size()) +
                                 " features, model expects " + std::to_string(sizes_.input));
  }
  if (label < 0 || static_cast<std::size_t>(label) >= sizes_.classes) {
    throw InvalidParameterError("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(sizes_.classes) + ")");
  }
}

std::vector<double> MlpModel::logits(std::span<const double> features) const {
  if (features.size() != sizes_.input) {
    throw DimensionMismatchError("logits: feature length mismatch");
  }
  const Offsets o = offsets(sizes_);
  const auto p = params_.values();
  std::vector<double> h(sizes_.hidden);
  for (std::size_t j = 0; j < sizes_.hidden; ++j) {
    const double* row = p.data() + o.w1 + j * sizes_.input;
    double z = p[o.b1 + j];
    for (std::size_t i = 0; i < sizes_.input; ++i) z += row[i] * features[i];
    h[j] = elu(z);
  }
  std::vector<double> out(sizes_.classes);
  for (std::size_t c = 0; c < sizes_.classes; ++c) {
    const double* row = p.data() + o.w2 + c * sizes_.hidden;
    double z = p[o.b2 + c];
    for (std::size_t j = 0; j < sizes_.hidden; ++j) z += row[j] * h[j];
    out[c] = z;
  }
  return out;
}

int MlpModel::predict(std::span<const double> features) const {
  const auto z = logits(features);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double MlpModel::loss(std::span<const double> features, int label) const {
  check_example(features, label);
  const auto z = logits(features);
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum) - z[static_cast<std::size_t>(label)];
}

ParamVector MlpModel::per_example_gradient(std::span<const double> features,
                                           int label) const {
  check_example(features, label);
  const std::size_t in = sizes_.input, hid = sizes_.hidden, out = sizes_.classes;
  const Offsets o = offsets(sizes_);
  const auto p = params_.values();

  std::vector<double> pre(hid), h(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    const double* row = p.data() + o.w1 + j * in;
    double z = p[o.b1 + j];
    for (std::size_t i = 0; i < in; ++i) z += row[i] * features[i];
    pre[j] = z;
    h[j] = elu(z);
  }
  std::vector<double> prob(out);
  for (std::size_t c = 0; c < out; ++c) {
    const double* row = p.data() + o.w2 + c * hid;
    double z = p[o.b2 + c];
    for (std::size_t j = 0; j < hid; ++j) z += row[j] * h[j];
    prob[c] = z;
  }
  softmax(prob);
  prob[static_cast<std::size_t>(label)] -= 1.0;  // dL/dlogits

  ParamVector grad(p.size());
  auto g = grad.values();
  std::vector<double> dh(hid, 0.0);
  for (std::size_t c = 0; c < out; ++c) {
    const double dz = prob[c];
    g[o.b2 + c] = dz;
    double* grow = g.data() + o.w2 + c * hid;
    const double* wrow = p.data() + o.w2 + c * hid;
    for (std::size_t j = 0; j < hid; ++j) {
      grow[j] = dz * h[j];
      dh[j] += dz * wrow[j];
    }
  }
  for (std::size_t j = 0; j < hid; ++j) {
    const double dz = dh[j] * elu_grad(pre[j]);
    g[o.b1 + j] = dz;
    if (dz == 0.0) continue;
    double* grow = g.data() + o.w1 + j * in;
    for (std::size_t i = 0; i < in; ++i) grow[i] = dz * features[i];
  }
  return grad;
}

ParamVector MlpModel::batch_gradient(std::span<const Example> batch) const {
  if (batch.empty()) throw InvalidParameterError("batch_gradient: empty batch");
  ParamVector acc(dim());
  for (const auto& x : batch) acc += per_example_gradient(x);
  acc *= 1.0 / static_cast<double>(batch.size());
  return acc;
}

double MlpModel::mean_loss(std::span<const Example> batch) const {
  if (batch.empty()) throw InvalidParameterError("mean_loss: empty batch");
  double s = 0.0;
  for (const auto& x : batch) s += loss(x);
  return s / static_cast<double>(batch.size());
}

double MlpModel::evaluate(std::span<const Example> data) const {
  if (data.empty()) throw InvalidParameterError("evaluate: empty data");
  std::size_t correct = 0;
  for (const auto& x : data) {
    if (predict(x.features) == x.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace dpbyz
