#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "b92/analysis.hpp"
#include "b92/protocol.hpp"

namespace b92::cli {

/// Flat `key = value` configuration. Later assignments override earlier ones.
using KeyValues = std::map<std::string, std::string>;

enum class OutputFormat { Csv, Json };

struct Sweep {
  std::string param;
  std::vector<double> values;
};

struct ExperimentSpec {
  KeyValues settings;  // merged file + command-line values the session is built from
  SessionConfig session;
  std::optional<Sweep> sweep;
  std::uint32_t repetitions = 1;
  OutputFormat format = OutputFormat::Csv;
  double significance = kDefaultSignificance;
};

inline constexpr const char* kSweepCsvHeader =
    "sweep_param,sweep_value,repetition,seed,n_slots,clicks,conclusive,conclusive_rate,qber,"
    "verdict_rejected";

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError with
/// the line number on malformed input.
KeyValues parse_key_values(std::istream& in);

/// All recognised configuration keys.
const std::vector<std::string>& known_keys();

/// Keys a sweep may vary.
const std::vector<std::string>& sweepable_keys();

SessionConfig build_session(const KeyValues& settings);

ExperimentSpec build_spec(const KeyValues& settings);

/// One summary row per repetition (seed = base seed + repetition).
void cmd_simulate(const ExperimentSpec& spec, std::ostream& out);

/// Rows ordered sweep value major, repetition minor. Sessions may run
/// concurrently; output order does not depend on completion order.
void cmd_sweep(const ExperimentSpec& spec, std::ostream& out);

void cmd_feasibility(const ExperimentSpec& spec, std::ostream& out);

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 on completion, 1 for configuration errors, 2 for usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace b92::cli
