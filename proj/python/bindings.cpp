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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dpbyz/accountant.hpp"
#include "dpbyz/aggregation.hpp"
#include "dpbyz/config.hpp"
#include "dpbyz/errors.hpp"
#include "dpbyz/harness.hpp"
#include "dpbyz/metrics.hpp"
#include "dpbyz/statistics.hpp"

namespace py = pybind11;

namespace dpbyz {
namespace {

ExperimentConfig config_from(const std::string& text, const std::map<std::string, std::string>& overrides) {
  ExperimentConfig c = parse_config(text);
  for (const auto& [k, v] : overrides) apply_setting(c, k, v);
  validate(c);
  return c;
}

py::dict trace_dict(const RoundTrace& t) {
  py::dict d;
  d["round"] = t.round;
  d["accuracy"] = t.accuracy ? py::cast(*t.accuracy) : py::none();
  d["selected"] = t.selected;
  std::vector<std::size_t> rejected;
  for (std::size_t i = 0; i < t.verdicts.size(); ++i) {
    if (!t.verdicts[i].passed()) rejected.push_back(i);
  }
  d["rejected_first_stage"] = rejected;
  d["scores"] = t.scores;
  return d;
}

py::dict run_dict(const RunResult& r) {
  const RunSummary s = summarize(r);
  py::dict d;
  d["config_hash"] = s.config_hash;
  d["final_accuracy"] = s.final_accuracy;
  d["precision"] = s.quality.precision;
  d["recall"] = s.quality.recall;
  d["rounds"] = r.plan.rounds;
  d["sigma"] = r.plan.sigma;
  d["eta"] = r.plan.eta;
  d["byzantine"] = r.byzantine;
  py::list traces;
  for (const auto& t : r.traces) traces.append(trace_dict(t));
  d["traces"] = traces;
  return d;
}

}  // namespace
}  // namespace dpbyz

PYBIND11_MODULE(_dpbyz, m) {
  using namespace dpbyz;
  m.doc() = "Deterministic simulator of differentially private Byzantine-resilient FL";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<InvalidParameterError>(m, "InvalidParameterError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("solve_sigma",
        [](double eps, double delta, double q, long steps) { return solve_sigma(eps, delta, q, steps); },
        py::arg("eps"), py::arg("delta"), py::arg("q"), py::arg("steps"));
  m.def("accountant_epsilon",
        [](double sigma, double q, long steps, double delta) {
          return accountant_epsilon(sigma, q, steps, delta);
        },
        py::arg("sigma"), py::arg("q"), py::arg("steps"), py::arg("delta"));
  m.def("default_delta", &default_delta, py::arg("local_size"));

  m.def("norm_bounds",
        [](double sigma, std::size_t d) {
          const auto b = NormTestBounds::make(sigma, d);
          return py::make_tuple(b.lower, b.upper);
        },
        py::arg("sigma"), py::arg("dim"));
  m.def("ks_test",
        [](std::vector<double> v, double sigma) {
          const KsVerdict k = ks_test(ParamVector(std::move(v)), sigma);
          return py::make_tuple(k.statistic, k.p_value, k.pass);
        },
        py::arg("values"), py::arg("sigma"));
  m.def("first_stage_check",
        [](std::vector<double> v, double sigma, std::size_t batch_size) {
          return first_stage_check(ParamVector(std::move(v)), sigma, batch_size).passed();
        },
        py::arg("upload"), py::arg("sigma"), py::arg("batch_size") = 16);

  m.def("config_keys", [] {
    std::vector<std::string> names;
    for (const auto& k : config_keys()) names.push_back(k.name);
    return names;
  });
  m.def("parse_config",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          const ExperimentConfig c = config_from(text, overrides);
          py::dict d;
          for (const auto& k : config_keys()) d[py::str(k.name)] = get_setting(c, k.name);
          return d;
        },
        py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("run",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          const ExperimentConfig c = config_from(text, overrides);
          RunResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(c);
          }
          return run_dict(r);
        },
        py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs one experiment from config text and returns a summary with per-round traces.");
}
