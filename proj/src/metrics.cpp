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

#include "dpbyz/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "dpbyz/errors.hpp"
#include "json.hpp"

namespace dpbyz {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace

const char* const kSummaryCsvHeader =
    "config_hash,final_accuracy,mean_precision,mean_recall,rounds,sigma,eta";

SelectionQuality selection_quality(std::span<const RoundTrace> traces,
                                   const std::vector<bool>& byzantine) {
  std::size_t honest_total = 0;
  for (bool b : byzantine) honest_total += b ? 0 : 1;
  double p_sum = 0.0, r_sum = 0.0;
  std::size_t p_n = 0, r_n = 0;
  for (const auto& t : traces) {
    if (t.selected.empty()) continue;
    std::size_t hits = 0;
    for (std::size_t i : t.selected) hits += byzantine.at(i) ? 0 : 1;
    p_sum += static_cast<double>(hits) / static_cast<double>(t.selected.size());
    ++p_n;
    if (honest_total > 0) {
      r_sum += static_cast<double>(hits) / static_cast<double>(honest_total);
      ++r_n;
    }
  }
  const double nan = std::nan("");
  return {p_n ? p_sum / static_cast<double>(p_n) : nan,
          r_n ? r_sum / static_cast<double>(r_n) : nan};
}

RunSummary summarize(const RunResult& result) {
  RunSummary s;
  s.config_hash = config_hash(result.config);
  s.final_accuracy = result.final_accuracy();
  s.quality = selection_quality(result.traces, result.byzantine);
  s.rounds = static_cast<long>(result.traces.size());
  s.sigma = result.plan.sigma;
  s.eta = result.plan.eta;
  return s;
}

std::string round_json(const RoundTrace& trace) {
  nlohmann::ordered_json j;
  j["round"] = trace.round;
  j["accuracy"] = trace.accuracy ? nlohmann::ordered_json(*trace.accuracy) : nullptr;
  j["selected"] = trace.selected;
  j["rejected_first_stage"] = trace.rejected_first_stage();
  j["scores"] = trace.scores;
  return j.dump();
}

void write_jsonl(std::span<const RoundTrace> traces, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& t : traces) out << round_json(t) << '\n';
  check_written(out, path);
}

void write_summary_csv(std::span<const RunSummary> rows, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kSummaryCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.config_hash << ',' << csv_number(r.final_accuracy) << ','
        << csv_number(r.quality.precision) << ',' << csv_number(r.quality.recall) << ','
        << r.rounds << ',' << csv_number(r.sigma) << ',' << csv_number(r.eta) << '\n';
  }
  check_written(out, path);
}

void emit_metrics(const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_jsonl(result.traces, dir / "metrics.jsonl");
  std::vector<RunSummary> rows;
  if (!result.traces.empty()) rows.push_back(summarize(result));
  write_summary_csv(rows, dir / "summary.csv");
}

}  // namespace dpbyz
