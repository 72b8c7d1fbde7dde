#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "b92/attacks.hpp"
#include "b92/physical.hpp"
#include "b92/quantum.hpp"

namespace b92 {

struct SessionConfig {
  double geometry_phi = 0.7853981633974483;  // pi/4
  std::uint64_t n_slots = 100000;
  SourceModel alice_source = IdealSinglePhoton{};
  DetectorModel bob_detector{};
  FiberSegment fiber{};  // Alice -> Bob, total
  AttackConfig attack = NoAttack{};
  std::uint64_t seed = 1;
};

/// Throws ConfigError (or DomainError for phi) naming the offending field.
void validate(const SessionConfig& config);

/// B1 = {psi1, psi1_bar} certifies bit 1, B2 = {psi2, psi2_bar} certifies bit 0.
enum class BobBasis : std::uint8_t { B1, B2 };

struct SlotRecord {
  std::int64_t slot_index = 0;
  std::uint8_t alice_bit = 0;
  std::optional<EveOutcome> eve_symbol;
  BobBasis bob_basis = BobBasis::B1;
  bool bob_clicked = false;
  std::optional<std::uint32_t> bob_resolved_count;
  std::optional<std::uint8_t> bob_conclusive_bit;

  friend bool operator==(const SlotRecord&, const SlotRecord&) = default;
};

struct SiftedPair {
  std::uint8_t alice_bit;
  std::uint8_t bob_bit;
  friend bool operator==(const SiftedPair&, const SiftedPair&) = default;
};

struct SessionResult {
  std::vector<SlotRecord> slots;
  std::vector<SiftedPair> sifted_pairs;
  std::uint64_t conclusive_count = 0;
  double qber = 0.0;
  std::uint64_t click_count = 0;
  // Slots in which an eavesdropper received at least one photon.
  std::uint64_t eve_received_count = 0;
  // Two-point attack only: Eve2's keep probability actually used, whether the
  // throttle had to fall back to 1 because the placement is infeasible, and
  // whether the relay arrives too late for Eve2 to act.
  std::optional<double> keep_probability;
  bool throttle_fallback = false;
  bool relay_late = false;

  friend bool operator==(const SessionResult&, const SessionResult&) = default;
};

/// Runs every slot sequentially from a single stream seeded with config.seed.
SessionResult run_session(const SessionConfig& config);

std::vector<SiftedPair> sift(std::span<const SlotRecord> slots);

double qber(std::span<const SiftedPair> pairs);

/// Analytic per-slot conclusive probability for honest, two-point and
/// beam-split configurations. Throws UnsupportedConfiguration otherwise.
double expected_conclusive_rate(const SessionConfig& config);

/// Same configuration with the attack removed.
double honest_conclusive_rate(const SessionConfig& config);

/// Histogram of Bob's resolved photon counts; index k counts slots with k
/// registrations. Slots without a resolved count are tallied at index 0.
std::vector<std::uint64_t> photon_count_histogram(const SessionResult& result);

/// Eve2's keep probability for a two-point config and whether it fell back to
/// unthrottled (1.0) because no throttle can match the honest rate.
struct ThrottleDecision {
  double keep;
  bool fallback;
};
ThrottleDecision two_point_throttle(const SessionConfig& config, const TwoPointAttack& attack);

}  // namespace b92
