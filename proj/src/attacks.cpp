#include "b92/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "b92/errors.hpp"

namespace b92 {

const char* attack_name(const AttackConfig& attack) noexcept {
  switch (attack.index()) {
    case 0:
      return "none";
    case 1:
      return "two_point";
    case 2:
      return "naive";
    case 3:
      return "beam_split";
  }
  return "unknown";
}

const char* to_string(GuessRule rule) noexcept {
  switch (rule) {
    case GuessRule::ConsistentWithOutcome:
      return "consistent";
    case GuessRule::AlwaysPsi1:
      return "always_psi1";
    case GuessRule::Random:
      return "random";
  }
  return "unknown";
}

RelayMessage eve1_process(const PhotonPulse& pulse, const ProtocolGeometry& geometry,
                          DiscriminationStrategy strategy, RandomStream& rand) {
  if (pulse.photon_count == 0) return {pulse.slot_index, EveOutcome::Inconclusive};
  return {pulse.slot_index, discriminate(geometry, strategy, pulse.state, rand)};
}

double throttle_keep_probability(double p_succ, double target_t) {
  if (!(p_succ > 0.0 && p_succ <= 1.0)) throw DomainError("p_succ must lie in (0, 1]");
  if (!(target_t > 0.0 && target_t <= 1.0)) throw DomainError("target_t must lie in (0, 1]");
  const double keep = target_t / p_succ;
  // Rounding at the exact threshold must not flip the verdict.
  if (keep > 1.0 + 1e-12) {
    throw InfeasibleAttack("target transmittance " + std::to_string(target_t) +
                           " exceeds Eve's conclusive probability " + std::to_string(p_succ));
  }
  return std::min(keep, 1.0);
}

PhotonPulse eve2_resend(const RelayMessage& msg, double keep_prob,
                        const ProtocolGeometry& geometry, const SourceModel& eve2_source,
                        RandomStream& rand) {
  const PureState& state =
      msg.symbol == EveOutcome::DefinitelyPsi2 ? geometry.psi2 : geometry.psi1;
  PhotonPulse vacuum{0, state, msg.slot_index};
  if (msg.symbol == EveOutcome::Inconclusive) return vacuum;
  if (!rand.bernoulli(keep_prob)) return vacuum;
  return emit(eve2_source, state, msg.slot_index, rand);
}

RelayTiming relay_timing_ok(double eve1_pos_km, double eve2_pos_km, double group_index,
                            double extra_latency_s) {
  const double separation = eve2_pos_km - eve1_pos_km;
  const double slack =
      fiber_delay_s(separation, group_index) - classical_delay_s(separation) - extra_latency_s;
  return {slack >= 0.0, slack};
}

NaiveResendResult naive_intercept_resend(const PhotonPulse& pulse,
                                         const ProtocolGeometry& geometry,
                                         DiscriminationStrategy strategy, GuessRule guess_rule,
                                         RandomStream& rand) {
  if (pulse.photon_count == 0) return {pulse, EveOutcome::Inconclusive};

  const auto detail = discriminate_detailed(geometry, strategy, pulse.state, rand);
  PhotonPulse out{1, geometry.psi1, pulse.slot_index};
  switch (detail.outcome) {
    case EveOutcome::DefinitelyPsi1:
      out.state = geometry.psi1;
      break;
    case EveOutcome::DefinitelyPsi2:
      out.state = geometry.psi2;
      break;
    case EveOutcome::Inconclusive: {
      GuessRule rule = guess_rule;
      // The POVM's inconclusive outcome carries no state label.
      if (rule == GuessRule::ConsistentWithOutcome && !detail.landed_on_signal) {
        rule = GuessRule::Random;
      }
      switch (rule) {
        case GuessRule::ConsistentWithOutcome:
          out.state = detail.basis == 1 ? geometry.psi1 : geometry.psi2;
          break;
        case GuessRule::AlwaysPsi1:
          out.state = geometry.psi1;
          break;
        case GuessRule::Random:
          out.state = rand.uniform() < 0.5 ? geometry.psi1 : geometry.psi2;
          break;
      }
      break;
    }
  }
  return {out, detail.outcome};
}

double beam_split_leak_fraction(double mean_mu) {
  if (!(mean_mu >= 0.0)) throw DomainError("mean_mu must be >= 0");
  return -std::expm1(-mean_mu);
}

TwoPointRegistration two_point_registration(const TwoPointAttack& attack,
                                            const SourceModel& alice_source,
                                            const DetectorModel& bob_detector,
                                            const FiberSegment& fiber, double p_succ) {
  const double t_alice = transmittance(attack.eve1_pos_km, fiber.atten_db_per_km);
  const double t_mid =
      transmittance(attack.eve2_pos_km - attack.eve1_pos_km, fiber.atten_db_per_km);
  const double t_bob =
      transmittance(fiber.length_km - attack.eve2_pos_km, fiber.atten_db_per_km);
  const double eta = bob_detector.efficiency;

  const double honest = 1.0 - generating_function(alice_source, 1.0 - t_alice * t_mid * t_bob * eta);
  const double eve1_nonvacuum = 1.0 - generating_function(alice_source, 1.0 - t_alice);
  const double eve2_registered = 1.0 - generating_function(attack.eve2_source, 1.0 - t_bob * eta);
  return {honest, eve1_nonvacuum * p_succ * eve2_registered};
}

}  // namespace b92
