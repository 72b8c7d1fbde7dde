#include "b92/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "b92/attacks.hpp"
#include "b92/errors.hpp"

namespace b92 {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Solves 1 - G(1 - x) = target for the source's thinning parameter x in [0, 1].
// Empty when even x = 1 registers less often than target.
std::optional<double> registration_inverse(const SourceModel& source, double target) {
  const double x = std::visit(
      Overloaded{
          [&](const IdealSinglePhoton&) { return target; },
          [&](const WeakCoherent& s) {
            if (s.mean_mu <= 0.0 || target >= 1.0) return std::numeric_limits<double>::infinity();
            return -std::log1p(-target) / s.mean_mu;
          },
          [&](const SubPoissonian& s) {
            const auto d = support_probabilities(s);
            const double b = d.p1 + 2.0 * d.p2;
            const double disc = b * b - 4.0 * d.p2 * target;
            if (disc < 0.0 || b <= 0.0) return std::numeric_limits<double>::infinity();
            return 2.0 * target / (b + std::sqrt(disc));
          },
      },
      source);
  if (!(x <= 1.0)) return std::nullopt;
  return x;
}

bool is_ideal(const SourceModel& s) { return std::holds_alternative<IdealSinglePhoton>(s); }

}  // namespace

double min_separation_km(double p_succ, double atten_db_per_km) {
  if (!(p_succ > 0.0 && p_succ <= 1.0)) throw DomainError("p_succ must lie in (0, 1]");
  if (!(atten_db_per_km > 0.0)) throw DomainError("attenuation must be > 0 dB/km");
  return -10.0 * std::log10(p_succ) / atten_db_per_km;
}

FeasibilityReport feasibility_report(const SessionConfig& config) {
  const auto* attack = std::get_if<TwoPointAttack>(&config.attack);
  if (attack == nullptr) {
    throw UnsupportedConfiguration("feasibility report requires a two_point attack, got " +
                                   std::string(attack_name(config.attack)));
  }
  validate(config);
  const FiberSegment& fiber = config.fiber;
  const auto geometry = make_geometry(config.geometry_phi);

  FeasibilityReport report;
  report.p_succ = success_probability(geometry, attack->strategy);
  report.configured_separation_km = attack->eve2_pos_km - attack->eve1_pos_km;

  const auto reg = two_point_registration(*attack, config.alice_source, config.bob_detector,
                                          fiber, report.p_succ);

  // Threshold transmittance of the Eve1 -> Eve2 span: Bob's honest
  // registration probability falls to what Eve2 can deliver unthrottled.
  const double t_alice = transmittance(attack->eve1_pos_km, fiber.atten_db_per_km);
  const double t_bob = transmittance(fiber.length_km - attack->eve2_pos_km, fiber.atten_db_per_km);
  const double scale = t_alice * t_bob * config.bob_detector.efficiency;
  double t_threshold = 0.0;
  if (reg.attack_unthrottled > 0.0 && scale > 0.0) {
    const auto x = registration_inverse(config.alice_source, reg.attack_unthrottled);
    t_threshold = x ? std::min(1.0, *x / scale) : 1.0;
  }

  const double inf = std::numeric_limits<double>::infinity();
  if (t_threshold <= 0.0) {
    report.required_db = inf;
    report.min_separation_km = inf;
  } else {
    report.required_db = -10.0 * std::log10(t_threshold);
    if (t_threshold >= 1.0) {
      report.required_db = 0.0;
      report.min_separation_km = 0.0;
    } else if (fiber.atten_db_per_km > 0.0) {
      report.min_separation_km = min_separation_km(t_threshold, fiber.atten_db_per_km);
    } else {
      report.min_separation_km = inf;
    }
  }

  const auto timing = relay_timing_ok(attack->eve1_pos_km, attack->eve2_pos_km,
                                      fiber.group_index, attack->extra_latency_s);
  report.timing_slack_s = timing.slack_s;

  const bool distance_ok = report.configured_separation_km >= report.min_separation_km;
  report.feasible = distance_ok && timing.ok;
  if (report.feasible) {
    report.throttle_keep =
        reg.attack_unthrottled > 0.0 ? std::min(1.0, reg.honest / reg.attack_unthrottled) : 1.0;
  }

  auto& notes = report.notes;
  if (!distance_ok) {
    notes.emplace_back("separation below minimum: Bob's detection rate would expose the attack");
  }
  if (!timing.ok) {
    notes.emplace_back("classical relay arrives after the photon would have reached Eve2");
  }
  if (attack->strategy == DiscriminationStrategy::OptimalUnambiguous) {
    notes.emplace_back("Eve1 uses the optimal unambiguous POVM instead of random-basis projection");
  }
  if (!is_ideal(config.alice_source)) {
    notes.emplace_back("Alice's source is not single-photon; threshold recomputed from its photon "
                       "statistics");
  }
  if (!is_ideal(attack->eve2_source)) {
    notes.emplace_back("Eve2's source is not single-photon; a photon-number-resolving Bob can "
                       "compare her statistics with Alice's");
  }
  if (config.bob_detector.efficiency < 1.0 || config.bob_detector.dark_count_prob > 0.0) {
    notes.emplace_back("Bob's detector is non-ideal; threshold accounts for its efficiency");
  }
  if (attack->eve1_pos_km > 0.0 || attack->eve2_pos_km < fiber.length_km) {
    notes.emplace_back("non-zero Alice->Eve1 or Eve2->Bob segments included in the budget");
  }
  return report;
}

TestVerdict rate_consistency_test(std::uint64_t observed, std::uint64_t n_slots,
                                  double expected_rate, double significance) {
  if (!(expected_rate > 0.0 && expected_rate < 1.0)) {
    throw DomainError("expected_rate must lie strictly inside (0, 1)");
  }
  if (n_slots < 1) throw DomainError("n_slots must be >= 1");
  const double n = static_cast<double>(n_slots);
  const double mean = n * expected_rate;
  const double sd = std::sqrt(n * expected_rate * (1.0 - expected_rate));
  TestVerdict v;
  v.significance = significance;
  v.statistic = (static_cast<double>(observed) - mean) / sd;
  v.p_value = std::erfc(std::abs(v.statistic) / std::sqrt(2.0));
  v.rejected = v.p_value < significance;
  return v;
}

TestVerdict photon_statistics_test(std::span<const std::uint64_t> count_histogram,
                                   const SourceModel& expected_source, std::uint64_t n_slots,
                                   double significance, double channel_efficiency) {
  const std::uint64_t total =
      std::accumulate(count_histogram.begin(), count_histogram.end(), std::uint64_t{0});
  if (total != n_slots) {
    throw DomainError("histogram totals " + std::to_string(total) + " but n_slots is " +
                      std::to_string(n_slots));
  }
  std::uint64_t multi = 0;
  for (std::size_t k = 2; k < count_histogram.size(); ++k) multi += count_histogram[k];

  const double expected = multi_photon_probability(expected_source, channel_efficiency);
  if (expected <= 0.0 || expected >= 1.0) {
    const bool impossible = expected <= 0.0 ? multi > 0 : multi < n_slots;
    TestVerdict v;
    v.significance = significance;
    v.statistic = static_cast<double>(expected <= 0.0 ? multi : n_slots - multi);
    v.p_value = impossible ? 0.0 : 1.0;
    v.rejected = v.p_value < significance;
    return v;
  }
  return rate_consistency_test(multi, n_slots, expected, significance);
}

}  // namespace b92
