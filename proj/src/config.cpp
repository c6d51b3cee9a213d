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

#include "dpbyz/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "dpbyz/errors.hpp"

namespace dpbyz {
namespace {

constexpr std::string_view kAuto = "auto";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                    "': expected " + what);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

template <typename Enum, typename Parse>
Enum parse_enum(std::string_view key, std::string_view v, Parse parse) {
  try {
    return parse(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

struct Field {
  ConfigKey key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define DPBYZ_SIZE_FIELD(name, member, help)                                                  \
  Field{{name, help},                                                                         \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_int<std::size_t>(name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }}

#define DPBYZ_DOUBLE_FIELD(name, member, help)                                                \
  Field{{name, help},                                                                         \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_double(name, v); },    \
        [](const ExperimentConfig& c) { return format_double(c.member); }}

#define DPBYZ_BOOL_FIELD(name, member, help)                                                  \
  Field{{name, help},                                                                         \
        [](ExperimentConfig& c, std::string_view v) { c.member = parse_bool(name, v); },      \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }}

#define DPBYZ_OPT_DOUBLE_FIELD(name, member, help)                                            \
  Field{{name, help},                                                                         \
        [](ExperimentConfig& c, std::string_view v) {                                         \
          if (v == kAuto) c.member.reset(); else c.member = parse_double(name, v);            \
        },                                                                                    \
        [](const ExperimentConfig& c) {                                                       \
          return c.member ? format_double(*c.member) : std::string(kAuto);                    \
        }}

#define DPBYZ_OPT_LONG_FIELD(name, member, help)                                              \
  Field{{name, help},                                                                         \
        [](ExperimentConfig& c, std::string_view v) {                                         \
          if (v == kAuto) c.member.reset(); else c.member = parse_int<long>(name, v);         \
        },                                                                                    \
        [](const ExperimentConfig& c) {                                                       \
          return c.member ? std::to_string(*c.member) : std::string(kAuto);                   \
        }}

#define DPBYZ_ENUM_FIELD(name, member, parser, help)                                          \
  Field{{name, help},                                                                         \
        [](ExperimentConfig& c, std::string_view v) {                                         \
          c.member = parse_enum<decltype(c.member)>(name, v, parser);                         \
        },                                                                                    \
        [](const ExperimentConfig& c) { return std::string(to_string(c.member)); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{{"dataset", "synthetic, or a corpus name under the data root"},
            [](ExperimentConfig& c, std::string_view v) {
              if (v.empty()) bad_value("dataset", v, "a dataset name");
              c.dataset = std::string(v);
            },
            [](const ExperimentConfig& c) { return c.dataset; }},
      Field{{"data_root", "dataset root directory (default $DPBYZ_DATA_ROOT)"},
            [](ExperimentConfig& c, std::string_view v) { c.data_root = std::string(v); },
            [](const ExperimentConfig& c) { return c.data_root; }},
      DPBYZ_SIZE_FIELD("samples_per_worker", samples_per_worker, "synthetic shard size"),
      DPBYZ_SIZE_FIELD("feature_dim", feature_dim, "synthetic feature dimension"),
      Field{{"num_classes", "synthetic class count"},
            [](ExperimentConfig& c, std::string_view v) {
              c.num_classes = parse_int<int>("num_classes", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.num_classes); }},
      DPBYZ_DOUBLE_FIELD("separation", separation, "synthetic class-mean distance from origin"),
      DPBYZ_SIZE_FIELD("test_samples", test_samples, "synthetic test-set size"),
      DPBYZ_SIZE_FIELD("validation_samples", validation_samples,
                       "held-out validation size for the auxiliary set"),
      DPBYZ_ENUM_FIELD("partition", partition, partition_mode_from_string, "iid or non_iid"),
      DPBYZ_SIZE_FIELD("hidden", hidden, "hidden-layer width"),
      DPBYZ_SIZE_FIELD("n_honest", n_honest, "honest workers"),
      DPBYZ_SIZE_FIELD("n_byzantine", n_byzantine, "Byzantine workers"),
      DPBYZ_ENUM_FIELD("attack", attack.kind, attack_kind_from_string,
                       "none, gaussian, label_flip or optimized_local"),
      DPBYZ_DOUBLE_FIELD("ttbb", attack.ttbb, "fraction of rounds attackers stay honest"),
      DPBYZ_OPT_DOUBLE_FIELD("attack_lambda", attack.lambda_override,
                             "optimized-attack lambda (auto: M_n/sqrt(B_m) - 1)"),
      DPBYZ_ENUM_FIELD("copy_source", copy_source, copy_source_from_string,
                       "honest upload replayed before ttbb: lowest or random"),
      DPBYZ_DOUBLE_FIELD("epsilon", epsilon, "privacy budget"),
      DPBYZ_OPT_DOUBLE_FIELD("delta", delta, "privacy delta (auto: 1/|D_i|^1.1)"),
      DPBYZ_OPT_DOUBLE_FIELD("sigma", sigma, "noise multiplier (auto: calibrated)"),
      DPBYZ_SIZE_FIELD("b_c", batch_size, "worker mini-batch size"),
      DPBYZ_DOUBLE_FIELD("beta", beta, "momentum coefficient"),
      DPBYZ_DOUBLE_FIELD("base_eta", base_eta, "base learning rate"),
      DPBYZ_DOUBLE_FIELD("base_sigma", base_sigma, "noise multiplier base_eta was tuned at"),
      DPBYZ_OPT_DOUBLE_FIELD("eta", eta, "learning rate (auto: base_eta*base_sigma/sigma)"),
      DPBYZ_DOUBLE_FIELD("epochs", epochs, "passes over a worker shard"),
      DPBYZ_OPT_LONG_FIELD("rounds", rounds, "round count (auto: from epochs)"),
      DPBYZ_ENUM_FIELD("momentum_reset", momentum_reset, momentum_reset_from_string,
                       "overwrite_slots or keep_slots"),
      DPBYZ_OPT_LONG_FIELD("eval_every", eval_every, "evaluation cadence (auto: ceil(T/50))"),
      DPBYZ_ENUM_FIELD("aggregator", aggregator, aggregator_from_string,
                       "two_stage, krum, rfa, cm, tm or none"),
      DPBYZ_DOUBLE_FIELD("gamma", gamma, "server prior on the honest fraction"),
      DPBYZ_SIZE_FIELD("aux_per_class", aux_per_class, "auxiliary samples per class"),
      DPBYZ_DOUBLE_FIELD("baseline_gamma", baseline_gamma,
                         "Byzantine fraction assumed by krum and tm"),
      DPBYZ_BOOL_FIELD("compose_first_agg", compose_first_agg,
                       "apply the first-stage filter before a baseline aggregator"),
      DPBYZ_BOOL_FIELD("clamp_scores", clamp_scores, "drop negative score increments"),
      Field{{"seed", "master seed"},
            [](ExperimentConfig& c, std::string_view v) {
              c.seed = parse_int<std::uint64_t>("seed", v);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
  };
  return table;
}

#undef DPBYZ_SIZE_FIELD
#undef DPBYZ_DOUBLE_FIELD
#undef DPBYZ_BOOL_FIELD
#undef DPBYZ_OPT_DOUBLE_FIELD
#undef DPBYZ_OPT_LONG_FIELD
#undef DPBYZ_ENUM_FIELD

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key.name == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string_view to_string(Aggregator a) {
  switch (a) {
    case Aggregator::kTwoStage: return "two_stage";
    case Aggregator::kKrum: return "krum";
    case Aggregator::kRfa: return "rfa";
    case Aggregator::kCoordinateMedian: return "cm";
    case Aggregator::kTrimmedMean: return "tm";
    case Aggregator::kNone: return "none";
  }
  return "none";
}

Aggregator aggregator_from_string(std::string_view s) {
  if (s == "two_stage") return Aggregator::kTwoStage;
  if (s == "krum") return Aggregator::kKrum;
  if (s == "rfa") return Aggregator::kRfa;
  if (s == "cm") return Aggregator::kCoordinateMedian;
  if (s == "tm") return Aggregator::kTrimmedMean;
  if (s == "none") return Aggregator::kNone;
  throw ConfigError("unknown aggregator '" + std::string(s) + "'");
}

std::string_view to_string(PartitionMode m) {
  return m == PartitionMode::kIid ? "iid" : "non_iid";
}

PartitionMode partition_mode_from_string(std::string_view s) {
  if (s == "iid") return PartitionMode::kIid;
  if (s == "non_iid") return PartitionMode::kNonIid;
  throw ConfigError("unknown partition mode '" + std::string(s) + "'");
}

std::string_view to_string(CopySource c) { return c == CopySource::kLowest ? "lowest" : "random"; }

CopySource copy_source_from_string(std::string_view s) {
  if (s == "lowest") return CopySource::kLowest;
  if (s == "random") return CopySource::kRandom;
  throw ConfigError("unknown copy_source '" + std::string(s) + "'");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  find_field(key).set(config, trim(value));
}

std::string get_setting(const ExperimentConfig& config, std::string_view key) {
  return find_field(key).get(config);
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.num_workers() == 0) fail("need at least one worker");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(c.baseline_gamma >= 0.0 && c.baseline_gamma < 0.5)) {
    fail("baseline_gamma must be in [0, 0.5)");
  }
  if (c.batch_size == 0) fail("b_c must be >= 1");
  if (!(c.beta >= 0.0 && c.beta < 1.0)) fail("beta must be in [0, 1)");
  if (!(c.attack.ttbb >= 0.0 && c.attack.ttbb <= 1.0)) fail("ttbb must be in [0, 1]");
  if (!(c.epsilon > 0.0)) fail("epsilon must be positive");
  if (c.delta && !(*c.delta > 0.0 && *c.delta < 1.0)) fail("delta must be in (0, 1)");
  if (c.sigma && !(*c.sigma > 0.0)) fail("sigma must be positive");
  if (c.eta && !(*c.eta > 0.0)) fail("eta must be positive");
  if (!(c.base_eta > 0.0 && c.base_sigma > 0.0)) fail("base_eta and base_sigma must be positive");
  if (!(c.epochs > 0.0)) fail("epochs must be positive");
  if (c.rounds && *c.rounds < 0) fail("rounds must be >= 0");
  if (c.eval_every && *c.eval_every < 1) fail("eval_every must be >= 1");
  if (c.hidden == 0) fail("hidden must be >= 1");
  if (c.aux_per_class == 0 && c.aggregator == Aggregator::kTwoStage) {
    fail("two_stage aggregation needs aux_per_class >= 1");
  }
  if (c.dataset == "synthetic") {
    if (c.num_classes < 2) fail("num_classes must be >= 2");
    if (c.feature_dim == 0) fail("feature_dim must be >= 1");
    if (c.samples_per_worker < c.batch_size) fail("samples_per_worker must be >= b_c");
    if (c.test_samples == 0) fail("test_samples must be >= 1");
    if (!(c.separation >= 0.0)) fail("separation must be >= 0");
  }
  if (c.attack.kind == AttackKind::kNone && c.attack.lambda_override) {
    fail("attack_lambda is set but attack = none");
  }
  if (c.n_byzantine > 0 && c.attack.kind != AttackKind::kNone && c.n_honest == 0) {
    if (c.attack.ttbb > 0.0) fail("ttbb > 0 needs at least one honest worker to copy");
    if (c.attack.kind == AttackKind::kOptimizedLocal) {
      fail("optimized_local needs at least one honest worker");
    }
  }
  if (c.attack.kind == AttackKind::kOptimizedLocal && c.n_byzantine > 0) {
    try {
      check_optimized_attack_feasible(c.n_honest, c.n_byzantine);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(std::string(e.what()) +
                            " (the malicious sum cannot mimic honest statistics)");
    }
  }
}

std::string canonical_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key.name;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dpbyz
