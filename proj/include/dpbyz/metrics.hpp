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

// JSONL per-round metrics and a one-row CSV summary.

#ifndef DPBYZ_METRICS_HPP_
#define DPBYZ_METRICS_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dpbyz/harness.hpp"

namespace dpbyz {

struct SelectionQuality {
  double precision = 0.0;  // mean over rounds of |selected & honest| / |selected|
  double recall = 0.0;     // mean over rounds of |selected & honest| / |honest|
};

SelectionQuality selection_quality(std::span<const RoundTrace> traces,
                                   const std::vector<bool>& byzantine);

struct RunSummary {
  std::string config_hash;
  double final_accuracy = 0.0;
  SelectionQuality quality;
  long rounds = 0;
  double sigma = 0.0;
  double eta = 0.0;
};

RunSummary summarize(const RunResult& result);

// One JSON object per round:
//   {"round", "accuracy" (null between evaluations), "selected",
//    "rejected_first_stage", "scores"}
std::string round_json(const RoundTrace& trace);

void write_jsonl(std::span<const RoundTrace> traces, const std::filesystem::path& path);

extern const char* const kSummaryCsvHeader;

// Header plus one row per summary; header only when `rows` is empty.
void write_summary_csv(std::span<const RunSummary> rows, const std::filesystem::path& path);

// Writes <dir>/metrics.jsonl and <dir>/summary.csv. A run with zero rounds
// yields an empty JSONL file and a header-only CSV.
void emit_metrics(const RunResult& result, const std::filesystem::path& dir);

}  // namespace dpbyz

#endif  // DPBYZ_METRICS_HPP_
