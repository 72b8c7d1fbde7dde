#include "b92/protocol.hpp"

#include <cmath>
#include <string>

#include "b92/errors.hpp"

namespace b92 {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double mean_photon_number(const SourceModel& source) {
  return std::visit(Overloaded{
                        [](const IdealSinglePhoton&) { return 1.0; },
                        [](const WeakCoherent& s) { return s.mean_mu; },
                        [](const SubPoissonian& s) { return s.mean_mu; },
                    },
                    source);
}

void check_position(double pos_km, double length_km, const char* field) {
  if (!(pos_km >= 0.0 && pos_km <= length_km)) {
    throw ConfigError(std::string(field) + " = " + std::to_string(pos_km) +
                      " lies outside the fiber [0, " + std::to_string(length_km) + "] km");
  }
}

// Fraction of Alice's photons diverted into Eve's arm.
double beam_split_tap_ratio(const SessionConfig& config, const BeamSplitAttack& attack) {
  const double mean = mean_photon_number(config.alice_source);
  if (attack.mean_mu_after_tap <= 0.0) return 0.0;
  if (mean <= 0.0) throw ConfigError("tap_mu requires a source with positive mean photon number");
  return attack.mean_mu_after_tap / mean;
}

double conclusive_from_registration(double p_registered, const SessionConfig& config) {
  const double s = std::sin(config.geometry_phi);
  // A dark count alone lands on the conclusive port half of the time.
  return p_registered * 0.5 * s * s +
         (1.0 - p_registered) * config.bob_detector.dark_count_prob * 0.5;
}

double honest_registration(const SessionConfig& config) {
  const double t = transmittance(config.fiber.length_km, config.fiber.atten_db_per_km);
  return 1.0 - generating_function(config.alice_source, 1.0 - t * config.bob_detector.efficiency);
}

struct BobMeasurement {
  bool clicked;
  std::optional<std::uint32_t> resolved;
  std::optional<std::uint8_t> bit;
};

BobMeasurement bob_measure(const ProtocolGeometry& geometry, const DetectorModel& detector,
                           BobBasis basis, const PhotonPulse& pulse, RandomStream& rand) {
  const MeasurementBasis b1{geometry.psi1, geometry.psi1_bar};
  const MeasurementBasis b2{geometry.psi2, geometry.psi2_bar};
  const MeasurementBasis& measured = basis == BobBasis::B1 ? b1 : b2;

  bool on_bar = false;
  if (pulse.photon_count > 0) {
    on_bar = sample_projective(pulse.state, measured, rand) == BasisOutcome::B;
  }
  const DetectionEvent event = detect(detector, pulse, rand);
  if (!event.photon_registered && event.clicked) {
    on_bar = rand.uniform() < 0.5;
  }

  BobMeasurement m{event.clicked, event.resolved_count, std::nullopt};
  if (event.clicked && on_bar) {
    // psi1_bar excludes psi1, so B1 certifies psi2 (bit 1); B2 certifies psi1 (bit 0).
    m.bit = basis == BobBasis::B1 ? 1 : 0;
  }
  return m;
}

}  // namespace

void validate(const SessionConfig& config) {
  make_geometry(config.geometry_phi);
  if (config.n_slots < 1) throw ConfigError("n_slots must be >= 1");
  validate(config.fiber);
  validate(config.alice_source);
  validate(config.bob_detector);

  const double length = config.fiber.length_km;
  std::visit(
      Overloaded{
          [](const NoAttack&) {},
          [&](const TwoPointAttack& a) {
            if (a.eve2_pos_km < a.eve1_pos_km) {
              throw ConfigError("eve2_km (" + std::to_string(a.eve2_pos_km) +
                                ") is before eve1_km (" + std::to_string(a.eve1_pos_km) +
                                "): position ordering requires eve1_km <= eve2_km");
            }
            check_position(a.eve1_pos_km, length, "eve1_km");
            check_position(a.eve2_pos_km, length, "eve2_km");
            if (!(a.extra_latency_s >= 0.0)) throw ConfigError("extra_latency_s must be >= 0");
            validate(a.eve2_source);
          },
          [&](const NaiveInterceptResend& a) { check_position(a.pos_km, length, "naive_pos_km"); },
          [&](const BeamSplitAttack& a) {
            if (!(a.mean_mu_after_tap >= 0.0)) throw ConfigError("tap_mu must be >= 0");
            const double r = beam_split_tap_ratio(config, a);
            const double t = transmittance(length, config.fiber.atten_db_per_km);
            if (r > 1.0 - t + 1e-12) {
              throw ConfigError("tap_mu diverts more light than the channel loses; Bob's rate "
                                "would drop");
            }
          },
      },
      config.attack);
}

ThrottleDecision two_point_throttle(const SessionConfig& config, const TwoPointAttack& attack) {
  if (!attack.throttle) return {1.0, false};
  const auto geometry = make_geometry(config.geometry_phi);
  const auto reg = two_point_registration(attack, config.alice_source, config.bob_detector,
                                          config.fiber,
                                          success_probability(geometry, attack.strategy));
  if (reg.honest <= 0.0) return {0.0, false};
  if (reg.attack_unthrottled <= 0.0) return {1.0, true};
  try {
    return {throttle_keep_probability(reg.attack_unthrottled, reg.honest), false};
  } catch (const InfeasibleAttack&) {
    return {1.0, true};
  }
}

SessionResult run_session(const SessionConfig& config) {
  validate(config);
  const ProtocolGeometry geometry = make_geometry(config.geometry_phi);
  const FiberSegment& fiber = config.fiber;
  RandomStream rand(config.seed);

  SessionResult result;
  result.slots.reserve(config.n_slots);

  // Per-attack constants.
  double t_first = transmittance(fiber.length_km, fiber.atten_db_per_km);
  double t_second = 1.0;
  double keep = 1.0;
  double tap_ratio = 0.0;
  if (const auto* a = std::get_if<TwoPointAttack>(&config.attack)) {
    t_first = transmittance(a->eve1_pos_km, fiber.atten_db_per_km);
    t_second = transmittance(fiber.length_km - a->eve2_pos_km, fiber.atten_db_per_km);
    const auto decision = two_point_throttle(config, *a);
    keep = decision.keep;
    result.keep_probability = keep;
    result.throttle_fallback = decision.fallback;
    result.relay_late =
        !relay_timing_ok(a->eve1_pos_km, a->eve2_pos_km, fiber.group_index, a->extra_latency_s)
             .ok;
  } else if (const auto* a = std::get_if<NaiveInterceptResend>(&config.attack)) {
    t_first = transmittance(a->pos_km, fiber.atten_db_per_km);
    t_second = transmittance(fiber.length_km - a->pos_km, fiber.atten_db_per_km);
  } else if (const auto* a = std::get_if<BeamSplitAttack>(&config.attack)) {
    tap_ratio = beam_split_tap_ratio(config, *a);
    // Bob's arm keeps the honest overall transmittance.
    t_second = tap_ratio < 1.0 ? std::min(1.0, t_first / (1.0 - tap_ratio)) : 0.0;
  }

  for (std::uint64_t i = 0; i < config.n_slots; ++i) {
    const auto slot = static_cast<std::int64_t>(i);
    SlotRecord record;
    record.slot_index = slot;
    record.alice_bit = rand.uniform() < 0.5 ? 0 : 1;
    const PureState& sent = record.alice_bit == 0 ? geometry.psi1 : geometry.psi2;
    PhotonPulse pulse = emit(config.alice_source, sent, slot, rand);

    std::visit(
        Overloaded{
            [&](const NoAttack&) { pulse = attenuate(pulse, t_first, rand); },
            [&](const TwoPointAttack& a) {
              pulse = attenuate(pulse, t_first, rand);
              if (pulse.photon_count > 0) ++result.eve_received_count;
              RelayMessage msg = eve1_process(pulse, geometry, a.strategy, rand);
              record.eve_symbol = msg.symbol;
              if (result.relay_late) msg.symbol = EveOutcome::Inconclusive;
              pulse = eve2_resend(msg, keep, geometry, a.eve2_source, rand);
              pulse = attenuate(pulse, t_second, rand);
            },
            [&](const NaiveInterceptResend& a) {
              pulse = attenuate(pulse, t_first, rand);
              if (pulse.photon_count > 0) ++result.eve_received_count;
              auto resent = naive_intercept_resend(pulse, geometry, a.strategy, a.guess_rule, rand);
              record.eve_symbol = resent.symbol;
              pulse = attenuate(resent.pulse, t_second, rand);
            },
            [&](const BeamSplitAttack&) {
              std::uint32_t tapped = 0;
              for (std::uint32_t k = 0; k < pulse.photon_count; ++k) {
                if (rand.bernoulli(tap_ratio)) ++tapped;
              }
              PhotonPulse eve_arm{tapped, pulse.state, slot};
              pulse.photon_count -= tapped;
              if (tapped > 0) ++result.eve_received_count;
              record.eve_symbol =
                  eve1_process(eve_arm, geometry, DiscriminationStrategy::ProjectiveRandomBasis,
                               rand)
                      .symbol;
              pulse = attenuate(pulse, t_second, rand);
            },
        },
        config.attack);

    record.bob_basis = rand.uniform() < 0.5 ? BobBasis::B1 : BobBasis::B2;
    const auto bob = bob_measure(geometry, config.bob_detector, record.bob_basis, pulse, rand);
    record.bob_clicked = bob.clicked;
    record.bob_resolved_count = bob.resolved;
    record.bob_conclusive_bit = bob.bit;
    if (bob.clicked) ++result.click_count;
    result.slots.push_back(record);
  }

  result.sifted_pairs = sift(result.slots);
  result.conclusive_count = result.sifted_pairs.size();
  result.qber = qber(result.sifted_pairs);
  return result;
}

std::vector<SiftedPair> sift(std::span<const SlotRecord> slots) {
  std::vector<SiftedPair> pairs;
  for (const auto& s : slots) {
    if (s.bob_conclusive_bit) pairs.push_back({s.alice_bit, *s.bob_conclusive_bit});
  }
  return pairs;
}

double qber(std::span<const SiftedPair> pairs) {
  if (pairs.empty()) return 0.0;
  std::size_t mismatched = 0;
  for (const auto& p : pairs) {
    if (p.alice_bit != p.bob_bit) ++mismatched;
  }
  return static_cast<double>(mismatched) / static_cast<double>(pairs.size());
}

double honest_conclusive_rate(const SessionConfig& config) {
  make_geometry(config.geometry_phi);
  return conclusive_from_registration(honest_registration(config), config);
}

double expected_conclusive_rate(const SessionConfig& config) {
  return std::visit(
      Overloaded{
          [&](const NoAttack&) { return honest_conclusive_rate(config); },
          [&](const BeamSplitAttack&) { return honest_conclusive_rate(config); },
          [&](const TwoPointAttack& a) {
            const auto geometry = make_geometry(config.geometry_phi);
            if (!relay_timing_ok(a.eve1_pos_km, a.eve2_pos_km, config.fiber.group_index,
                                 a.extra_latency_s)
                     .ok) {
              return conclusive_from_registration(0.0, config);
            }
            const auto reg =
                two_point_registration(a, config.alice_source, config.bob_detector, config.fiber,
                                       success_probability(geometry, a.strategy));
            const auto decision = two_point_throttle(config, a);
            return conclusive_from_registration(reg.attack_unthrottled * decision.keep, config);
          },
          [&](const NaiveInterceptResend&) -> double {
            throw UnsupportedConfiguration(
                "expected_conclusive_rate does not model the naive intercept-resend attack");
          },
      },
      config.attack);
}

std::vector<std::uint64_t> photon_count_histogram(const SessionResult& result) {
  std::vector<std::uint64_t> histogram(1, 0);
  for (const auto& s : result.slots) {
    const std::uint32_t k = s.bob_resolved_count.value_or(0);
    if (k >= histogram.size()) histogram.resize(k + 1, 0);
    ++histogram[k];
  }
  return histogram;
}

}  // namespace b92
