#include "b92/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <istream>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "b92/errors.hpp"

namespace b92::cli {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

const std::string* find(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  return it == kv.end() ? nullptr : &it->second;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid number for '" + key + "': '" + text + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid unsigned integer for '" + key + "': '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + text + "'");
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto* v = find(kv, key);
  return v ? parse_double(key, *v) : fallback;
}

std::uint64_t get_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback) {
  const auto* v = find(kv, key);
  return v ? parse_u64(key, *v) : fallback;
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  const auto* v = find(kv, key);
  return v ? parse_bool(key, *v) : fallback;
}

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto* v = find(kv, key);
  return v ? *v : fallback;
}

SourceModel build_source(const KeyValues& kv, const std::string& prefix, double default_mu) {
  const std::string kind = get_string(kv, prefix, "ideal");
  const double mu = get_double(kv, prefix + "_mu", default_mu);
  if (kind == "ideal") return IdealSinglePhoton{};
  if (kind == "coherent") return WeakCoherent{mu};
  if (kind == "subpoissonian") {
    return SubPoissonian{mu, get_double(kv, prefix + "_multi_prob", 0.0)};
  }
  throw ConfigError("invalid value for '" + prefix + "': '" + kind +
                    "' (expected ideal, coherent or subpoissonian)");
}

DiscriminationStrategy build_strategy(const KeyValues& kv) {
  const std::string s = get_string(kv, "strategy", "projective");
  if (s == "projective") return DiscriminationStrategy::ProjectiveRandomBasis;
  if (s == "optimal") return DiscriminationStrategy::OptimalUnambiguous;
  throw ConfigError("invalid value for 'strategy': '" + s + "' (expected projective or optimal)");
}

GuessRule build_guess_rule(const KeyValues& kv) {
  const std::string s = get_string(kv, "guess_rule", "consistent");
  if (s == "consistent") return GuessRule::ConsistentWithOutcome;
  if (s == "always_psi1") return GuessRule::AlwaysPsi1;
  if (s == "random") return GuessRule::Random;
  throw ConfigError("invalid value for 'guess_rule': '" + s +
                    "' (expected consistent, always_psi1 or random)");
}

std::string num(double v) { return fmt::format("{}", v); }

const char* boolean(bool b) { return b ? "true" : "false"; }

struct SummaryRow {
  std::uint64_t n_slots;
  std::uint64_t clicks;
  std::uint64_t conclusive;
  double conclusive_rate;
  double qber;
  std::string attack;
  std::uint64_t seed;
  bool verdict_rejected;
};

SummaryRow summarize(const SessionConfig& session, double significance) {
  const SessionResult r = run_session(session);
  SummaryRow row{session.n_slots,
                 r.click_count,
                 r.conclusive_count,
                 static_cast<double>(r.conclusive_count) / static_cast<double>(session.n_slots),
                 r.qber,
                 attack_name(session.attack),
                 session.seed,
                 false};
  const double expected = honest_conclusive_rate(session);
  if (expected > 0.0 && expected < 1.0) {
    row.verdict_rejected =
        rate_consistency_test(r.conclusive_count, session.n_slots, expected, significance)
            .rejected;
  } else {
    // Degenerate honest rate: any deviation from it is impossible without Eve.
    row.verdict_rejected =
        static_cast<double>(r.conclusive_count) != expected * static_cast<double>(session.n_slots);
  }
  return row;
}

template <class Job>
auto parallel_map(const std::vector<Job>& jobs, auto&& fn) {
  using Result = decltype(fn(jobs.front()));
  std::vector<Result> results;
  results.reserve(jobs.size());
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < jobs.size(); start += width) {
    std::vector<std::future<Result>> batch;
    const std::size_t stop = std::min(jobs.size(), start + width);
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, fn, std::cref(jobs[i])));
    }
    for (auto& f : batch) results.push_back(f.get());
  }
  return results;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    kv[std::move(key)] = std::move(value);
  }
  return kv;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "phi_deg",        "n_slots",          "seed",          "fiber_km",
      "atten_db_per_km", "group_index",     "source",        "source_mu",
      "source_multi_prob", "bob_efficiency", "bob_dark",     "bob_resolving",
      "attack",         "eve1_km",          "eve2_km",       "strategy",
      "eve2_source",    "eve2_source_mu",   "eve2_source_multi_prob", "throttle",
      "extra_latency_s", "naive_pos_km",    "guess_rule",    "tap_mu",
      "sweep_param",    "sweep_values",     "repetitions",   "format",
      "significance",
  };
  return keys;
}

const std::vector<std::string>& sweepable_keys() {
  static const std::vector<std::string> keys = {
      "fiber_km",  "phi_deg",   "eve1_km",        "eve2_km",  "naive_pos_km",
      "source_mu", "eve2_source_mu", "tap_mu",    "bob_efficiency", "bob_dark",
      "atten_db_per_km", "seed",
  };
  return keys;
}

SessionConfig build_session(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }

  SessionConfig s;
  s.geometry_phi = get_double(kv, "phi_deg", 45.0) * std::numbers::pi / 180.0;
  s.n_slots = get_u64(kv, "n_slots", 100000);
  s.seed = get_u64(kv, "seed", 1);
  s.fiber.length_km = get_double(kv, "fiber_km", 0.0);
  s.fiber.atten_db_per_km = get_double(kv, "atten_db_per_km", 0.2);
  s.fiber.group_index = get_double(kv, "group_index", 1.5);
  s.alice_source = build_source(kv, "source", 0.1);
  s.bob_detector.efficiency = get_double(kv, "bob_efficiency", 1.0);
  s.bob_detector.dark_count_prob = get_double(kv, "bob_dark", 0.0);
  s.bob_detector.number_resolving = get_bool(kv, "bob_resolving", false);

  const std::string attack = get_string(kv, "attack", "none");
  if (attack == "none") {
    s.attack = NoAttack{};
  } else if (attack == "two_point") {
    TwoPointAttack a;
    a.eve1_pos_km = get_double(kv, "eve1_km", 0.0);
    a.eve2_pos_km = get_double(kv, "eve2_km", s.fiber.length_km);
    a.strategy = build_strategy(kv);
    a.eve2_source = build_source(kv, "eve2_source", 1.0);
    a.throttle = get_bool(kv, "throttle", true);
    a.extra_latency_s = get_double(kv, "extra_latency_s", 0.0);
    s.attack = a;
  } else if (attack == "naive") {
    s.attack = NaiveInterceptResend{get_double(kv, "naive_pos_km", 0.0), build_strategy(kv),
                                    build_guess_rule(kv)};
  } else if (attack == "beam_split") {
    s.attack = BeamSplitAttack{get_double(kv, "tap_mu", 0.1)};
  } else {
    throw ConfigError("invalid value for 'attack': '" + attack +
                      "' (expected none, two_point, naive or beam_split)");
  }

  if (s.n_slots < 1) throw ConfigError("n_slots must be >= 1");
  try {
    validate(s);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("phi_deg: ") + e.what());
  }
  return s;
}

ExperimentSpec build_spec(const KeyValues& kv) {
  ExperimentSpec spec;
  spec.settings = kv;
  spec.session = build_session(kv);

  const auto reps = get_u64(kv, "repetitions", 1);
  if (reps < 1) throw ConfigError("repetitions must be >= 1");
  spec.repetitions = static_cast<std::uint32_t>(reps);

  const std::string format = get_string(kv, "format", "csv");
  if (format == "csv") {
    spec.format = OutputFormat::Csv;
  } else if (format == "json") {
    spec.format = OutputFormat::Json;
  } else {
    throw ConfigError("invalid value for 'format': '" + format + "' (expected csv or json)");
  }

  spec.significance = get_double(kv, "significance", kDefaultSignificance);
  if (!(spec.significance > 0.0 && spec.significance < 1.0)) {
    throw ConfigError("significance must lie in (0, 1)");
  }

  if (const auto* param = find(kv, "sweep_param")) {
    const auto& allowed = sweepable_keys();
    if (std::find(allowed.begin(), allowed.end(), *param) == allowed.end()) {
      throw ConfigError("unknown sweep parameter '" + *param + "'");
    }
    Sweep sweep{*param, {}};
    std::stringstream values(get_string(kv, "sweep_values", ""));
    std::string item;
    while (std::getline(values, item, ',')) {
      item = trim(item);
      if (!item.empty()) sweep.values.push_back(parse_double("sweep_values", item));
    }
    spec.sweep = std::move(sweep);
  } else if (find(kv, "sweep_values")) {
    throw ConfigError("sweep_values given without sweep_param");
  }
  return spec;
}

void cmd_simulate(const ExperimentSpec& spec, std::ostream& out) {
  std::vector<SessionConfig> sessions;
  for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
    SessionConfig s = spec.session;
    s.seed = spec.session.seed + rep;
    sessions.push_back(s);
  }
  const auto rows = parallel_map(
      sessions, [&](const SessionConfig& s) { return summarize(s, spec.significance); });

  if (spec.format == OutputFormat::Csv) {
    out << "n_slots,clicks,conclusive,conclusive_rate,qber,attack,seed\n";
    for (const auto& r : rows) {
      out << r.n_slots << ',' << r.clicks << ',' << r.conclusive << ',' << num(r.conclusive_rate)
          << ',' << num(r.qber) << ',' << r.attack << ',' << r.seed << '\n';
    }
    return;
  }
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"n_slots", r.n_slots},
                   {"clicks", r.clicks},
                   {"conclusive", r.conclusive},
                   {"conclusive_rate", r.conclusive_rate},
                   {"qber", r.qber},
                   {"attack", r.attack},
                   {"seed", r.seed}});
  }
  out << (arr.size() == 1 ? arr.front() : arr).dump(2) << '\n';
}

void cmd_sweep(const ExperimentSpec& spec, std::ostream& out) {
  if (!spec.sweep) throw ConfigError("sweep requires sweep_param and sweep_values");
  const Sweep& sweep = *spec.sweep;

  struct Job {
    double value;
    std::uint32_t repetition;
    SessionConfig session;
  };
  std::vector<Job> jobs;
  for (const double value : sweep.values) {
    KeyValues kv = spec.settings;
    kv[sweep.param] = num(value);
    const SessionConfig base = build_session(kv);
    for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
      Job job{value, rep, base};
      job.session.seed = base.seed + rep;
      jobs.push_back(std::move(job));
    }
  }
  const auto rows =
      parallel_map(jobs, [&](const Job& j) { return summarize(j.session, spec.significance); });

  if (spec.format == OutputFormat::Csv) {
    out << kSweepCsvHeader << '\n';
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& r = rows[i];
      out << sweep.param << ',' << num(jobs[i].value) << ',' << jobs[i].repetition << ','
          << r.seed << ',' << r.n_slots << ',' << r.clicks << ',' << r.conclusive << ','
          << num(r.conclusive_rate) << ',' << num(r.qber) << ',' << boolean(r.verdict_rejected)
          << '\n';
    }
    return;
  }
  json arr = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = rows[i];
    arr.push_back({{"sweep_param", sweep.param},
                   {"sweep_value", jobs[i].value},
                   {"repetition", jobs[i].repetition},
                   {"seed", r.seed},
                   {"n_slots", r.n_slots},
                   {"clicks", r.clicks},
                   {"conclusive", r.conclusive},
                   {"conclusive_rate", r.conclusive_rate},
                   {"qber", r.qber},
                   {"verdict_rejected", r.verdict_rejected}});
  }
  out << arr.dump(2) << '\n';
}

void cmd_feasibility(const ExperimentSpec& spec, std::ostream& out) {
  const FeasibilityReport r = feasibility_report(spec.session);
  if (spec.format == OutputFormat::Csv) {
    std::string notes;
    for (const auto& n : r.notes) notes += (notes.empty() ? "" : "; ") + n;
    out << "p_succ,required_db,min_separation_km,configured_separation_km,feasible,throttle_keep,"
           "timing_slack_s,notes\n";
    out << num(r.p_succ) << ',' << num(r.required_db) << ',' << num(r.min_separation_km) << ','
        << num(r.configured_separation_km) << ',' << boolean(r.feasible) << ','
        << (r.throttle_keep ? num(*r.throttle_keep) : std::string()) << ','
        << num(r.timing_slack_s) << ",\"" << notes << "\"\n";
    return;
  }
  json j = {{"p_succ", r.p_succ},
            {"required_db", r.required_db},
            {"min_separation_km", r.min_separation_km},
            {"configured_separation_km", r.configured_separation_km},
            {"feasible", r.feasible},
            {"throttle_keep", r.throttle_keep ? json(*r.throttle_keep) : json(nullptr)},
            {"timing_slack_s", r.timing_slack_s},
            {"notes", r.notes}};
  out << j.dump(2) << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-state (B92) QKD simulator with two-point eavesdropping analysis", "b92sim"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;

  std::vector<CLI::App*> commands;
  for (const auto& [name, help] :
       {std::pair{"simulate", "run sessions and print one summary row per repetition"},
        std::pair{"sweep", "run a parameter sweep"},
        std::pair{"feasibility", "print the two-point attack feasibility report"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--seed", seed, "base 64-bit seed");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "output file (default: standard output)");
    commands.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  CLI::App* command = app.get_subcommands().front();
  try {
    KeyValues kv;
    if (!config_path.empty()) {
      std::ifstream file(config_path);
      if (!file) throw ConfigError("cannot open config file '" + config_path + "'");
      kv = parse_key_values(file);
    }

    // Remaining arguments are `--key value` or `--key=value` overrides.
    const auto extras = command->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& arg = extras[i];
      if (arg.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + arg + "'");
      std::string key = arg.substr(2);
      std::string value;
      if (const auto eq = key.find('='); eq != std::string::npos) {
        value = key.substr(eq + 1);
        key.erase(eq);
      } else {
        if (i + 1 >= extras.size()) throw ConfigError("missing value for '--" + key + "'");
        value = extras[++i];
      }
      kv[key] = value;
    }
    if (seed) kv["seed"] = std::to_string(*seed);
    if (format) kv["format"] = *format;

    const ExperimentSpec spec = build_spec(kv);

    std::ostringstream buffer;
    const std::string name = command->get_name();
    if (name == "simulate") {
      if (spec.sweep) throw ConfigError("simulate does not accept sweep_param; use sweep");
      cmd_simulate(spec, buffer);
    } else if (name == "sweep") {
      cmd_sweep(spec, buffer);
    } else {
      cmd_feasibility(spec, buffer);
    }

    if (out_path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) throw ConfigError("cannot open output file '" + out_path + "'");
      file << buffer.str();
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace b92::cli
