#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "b92/physical.hpp"
#include "b92/protocol.hpp"

namespace b92 {

inline constexpr double kDefaultSignificance = 0.01;

struct FeasibilityReport {
  double p_succ = 0.0;        // Eve1's conclusive probability per single photon
  double required_db = 0.0;   // loss the Eve1 -> Eve2 span must provide
  double min_separation_km = 0.0;
  double configured_separation_km = 0.0;
  bool feasible = false;
  std::optional<double> throttle_keep;
  double timing_slack_s = 0.0;
  std::vector<std::string> notes;
};

struct TestVerdict {
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejected = false;
  double significance = kDefaultSignificance;
};

/// -10 log10(p_succ) / atten: the span whose loss equals Eve1's conclusive
/// probability. DomainError unless 0 < p_succ <= 1 and atten > 0.
double min_separation_km(double p_succ, double atten_db_per_km);

/// Viability of the configured two-point attack. The threshold is recomputed
/// from the configured source and detector statistics; with ideal devices it
/// reduces to min_separation_km(p_succ, atten). Throws UnsupportedConfiguration
/// unless the attack is TwoPointAttack.
FeasibilityReport feasibility_report(const SessionConfig& config);

/// Two-sided binomial test, normal approximation:
/// z = (observed - n p) / sqrt(n p (1 - p)), p_value = erfc(|z| / sqrt 2).
TestVerdict rate_consistency_test(std::uint64_t observed, std::uint64_t n_slots,
                                  double expected_rate, double significance = kDefaultSignificance);

/// Compares the multi-photon fraction (count >= 2) in `count_histogram` with
/// what `expected_source` would produce after per-photon survival probability
/// `channel_efficiency`. When the expected fraction is 0 (single-photon
/// source), any multi-photon count is an outright rejection (p_value 0).
TestVerdict photon_statistics_test(std::span<const std::uint64_t> count_histogram,
                                   const SourceModel& expected_source, std::uint64_t n_slots,
                                   double significance = kDefaultSignificance,
                                   double channel_efficiency = 1.0);

}  // namespace b92
