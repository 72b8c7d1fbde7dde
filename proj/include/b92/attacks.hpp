#pragma once

#include <cstdint>
#include <variant>

#include "b92/physical.hpp"
#include "b92/quantum.hpp"
#include "b92/random.hpp"

namespace b92 {

struct NoAttack {};

/// Eve1 measures every pulse near Alice and relays 0/1/2 over a classical line
/// running at c; Eve2 near Bob re-prepares the certified states.
struct TwoPointAttack {
  double eve1_pos_km = 0.0;
  double eve2_pos_km = 0.0;
  DiscriminationStrategy strategy = DiscriminationStrategy::ProjectiveRandomBasis;
  SourceModel eve2_source = IdealSinglePhoton{};
  bool throttle = true;
  double extra_latency_s = 0.0;  // processing delay added to the classical relay
};

/// What a single-point eavesdropper resends after an inconclusive result.
enum class GuessRule : std::uint8_t {
  ConsistentWithOutcome,  // the signal state the projective measurement collapsed onto
  AlwaysPsi1,
  Random,
};

struct NaiveInterceptResend {
  double pos_km = 0.0;
  DiscriminationStrategy strategy = DiscriminationStrategy::ProjectiveRandomBasis;
  GuessRule guess_rule = GuessRule::ConsistentWithOutcome;
};

/// Eve diverts part of each pulse at Alice's output. The tap replaces part of
/// the natural fiber loss, so Bob's overall transmittance is unchanged.
struct BeamSplitAttack {
  double mean_mu_after_tap = 0.1;  // mean photon number in Eve's tapped arm
};

using AttackConfig = std::variant<NoAttack, TwoPointAttack, NaiveInterceptResend, BeamSplitAttack>;

const char* attack_name(const AttackConfig& attack) noexcept;
const char* to_string(GuessRule rule) noexcept;

struct RelayMessage {
  std::int64_t slot_index = 0;
  EveOutcome symbol = EveOutcome::Inconclusive;
};

/// Destructive measurement of the incoming pulse. Vacuum relays symbol 0.
RelayMessage eve1_process(const PhotonPulse& pulse, const ProtocolGeometry& geometry,
                          DiscriminationStrategy strategy, RandomStream& rand);

/// Fraction of conclusive results Eve2 must keep so that Bob sees `target_t`.
/// Throws InfeasibleAttack when target_t exceeds p_succ.
double throttle_keep_probability(double p_succ, double target_t);

PhotonPulse eve2_resend(const RelayMessage& msg, double keep_prob,
                        const ProtocolGeometry& geometry, const SourceModel& eve2_source,
                        RandomStream& rand);

struct RelayTiming {
  bool ok;
  double slack_s;
};

/// slack = in-fiber photon delay - classical relay delay - extra latency,
/// both over the Eve1 -> Eve2 separation.
RelayTiming relay_timing_ok(double eve1_pos_km, double eve2_pos_km, double group_index,
                            double extra_latency_s);

struct NaiveResendResult {
  PhotonPulse pulse;
  EveOutcome symbol;
};

NaiveResendResult naive_intercept_resend(const PhotonPulse& pulse,
                                         const ProtocolGeometry& geometry,
                                         DiscriminationStrategy strategy, GuessRule guess_rule,
                                         RandomStream& rand);

/// 1 - e^-mu: probability that the tapped arm holds at least one photon.
double beam_split_leak_fraction(double mean_mu);

/// Bob's per-slot probability of registering at least one signal photon,
/// honest and under an unthrottled two-point attack, for the given devices.
struct TwoPointRegistration {
  double honest;
  double attack_unthrottled;
};

TwoPointRegistration two_point_registration(const TwoPointAttack& attack,
                                            const SourceModel& alice_source,
                                            const DetectorModel& bob_detector,
                                            const FiberSegment& fiber, double p_succ);

}  // namespace b92
