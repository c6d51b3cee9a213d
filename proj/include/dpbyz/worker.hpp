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

#ifndef DPBYZ_WORKER_HPP_
#define DPBYZ_WORKER_HPP_

#include <cstddef>
#include <memory>
#include <string_view>
#include <vector>

#include "dpbyz/data.hpp"
#include "dpbyz/numerics.hpp"

namespace dpbyz {

enum class AttackKind { kNone, kGaussian, kLabelFlip, kOptimizedLocal };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view s);

// Per-slot momentum buffers, one per mini-batch position. Starts at zero.
struct MomentumList {
  std::vector<ParamVector> slots;
  double beta = 0.1;

  MomentumList() = default;
  MomentumList(std::size_t batch_size, std::size_t dim, double beta);
  std::size_t batch_size() const { return slots.size(); }
};

// What happens to the momentum slots after an upload.
//   kOverwriteSlots: every slot is overwritten with the noisy upload.
//   kKeepSlots:    each slot keeps its own momentum.
enum class MomentumReset { kOverwriteSlots, kKeepSlots };

std::string_view to_string(MomentumReset mode);
MomentumReset momentum_reset_from_string(std::string_view s);

struct WorkerState {
  std::size_t index = 0;
  AttackKind role = AttackKind::kNone;
  std::shared_ptr<const Dataset> data;
  std::vector<std::size_t> shard;  // indices into *data
  MomentumList momentum;
  // Ground truth known to the harness. A Byzantine worker may still behave
  // honestly (role kNone), e.g. before its attack starts.
  bool byzantine = false;
};

}  // namespace dpbyz

#endif  // DPBYZ_WORKER_HPP_
