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

// One-hidden-layer ELU classifier trained with softmax cross-entropy.
//
// Parameters live in a single ParamVector laid out as
//   [ W1 (hidden x input, row-major) | b1 | W2 (classes x hidden) | b2 ]
// so that gradients, noise and aggregation all operate on flat vectors.

#ifndef DPBYZ_MODEL_HPP_
#define DPBYZ_MODEL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "dpbyz/numerics.hpp"

namespace dpbyz {

struct Example {
  std::vector<double> features;
  int label = 0;
};

struct LayerSizes {
  std::size_t input = 784;
  std::size_t hidden = 32;
  std::size_t classes = 10;

  // Exact parameter count including biases.
  std::size_t param_count() const {
    return hidden * input + hidden + classes * hidden + classes;
  }
  friend bool operator==(const LayerSizes&, const LayerSizes&) = default;
};

// Structured view of the flat parameter vector.
struct MlpWeights {
  std::vector<double> w1;  // hidden x input
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // classes x hidden
  std::vector<double> b2;  // classes
};

MlpWeights unflatten(const LayerSizes& sizes, const ParamVector& v);
ParamVector flatten(const LayerSizes& sizes, const MlpWeights& w);

class MlpModel {
 public:
  // All-zero parameters.
  explicit MlpModel(LayerSizes sizes);
  MlpModel(LayerSizes sizes, ParamVector params);

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpModel initialized(LayerSizes sizes, RngStream& rng);

  const LayerSizes& sizes() const { return sizes_; }
  std::size_t dim() const { return params_.dim(); }
  const ParamVector& params() const { return params_; }
  ParamVector& mutable_params() { return params_; }
  void set_params(ParamVector params);

  std::vector<double> logits(std::span<const double> features) const;
  // Argmax of the logits; ties go to the lowest class index.
  int predict(std::span<const double> features) const;
  double loss(std::span<const double> features, int label) const;
  double loss(const Example& x) const { return loss(x.features, x.label); }

  // Gradient of the cross-entropy loss of one labelled example.
  ParamVector per_example_gradient(std::span<const double> features, int label) const;
  ParamVector per_example_gradient(const Example& x) const {
    return per_example_gradient(x.features, x.label);
  }

  // Mean per-example gradient. Throws on an empty batch.
  ParamVector batch_gradient(std::span<const Example> batch) const;
  double mean_loss(std::span<const Example> batch) const;

  // Fraction of examples whose predicted class matches the label.
  double evaluate(std::span<const Example> data) const;

 private:
  void check_example(std::span<const double> features, int label) const;

  LayerSizes sizes_;
  ParamVector params_;
};

}  // namespace dpbyz

#endif  // DPBYZ_MODEL_HPP_
