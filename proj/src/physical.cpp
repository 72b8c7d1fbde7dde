#include "b92/physical.hpp"

#include <cmath>
#include <random>
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

}  // namespace

void validate(const FiberSegment& fiber) {
  if (!(fiber.length_km >= 0.0)) throw ConfigError("fiber length_km must be >= 0");
  if (!(fiber.atten_db_per_km >= 0.0)) throw ConfigError("fiber atten_db_per_km must be >= 0");
  if (!(fiber.group_index >= 1.0)) throw ConfigError("fiber group_index must be >= 1");
}

double poisson_multi_photon_probability(double mean_mu) {
  return 1.0 - std::exp(-mean_mu) - mean_mu * std::exp(-mean_mu);
}

ThreePointDistribution support_probabilities(const SubPoissonian& source) {
  const double p2 = source.multi_photon_prob;
  const double p1 = source.mean_mu - 2.0 * p2;
  return {1.0 - p1 - p2, p1, p2};
}

void validate(const SourceModel& source) {
  std::visit(Overloaded{
                 [](const IdealSinglePhoton&) {},
                 [](const WeakCoherent& s) {
                   if (!(s.mean_mu >= 0.0)) throw ConfigError("source mean_mu must be >= 0");
                 },
                 [](const SubPoissonian& s) {
                   if (!(s.mean_mu >= 0.0)) throw ConfigError("source mean_mu must be >= 0");
                   if (!(s.multi_photon_prob >= 0.0)) {
                     throw ConfigError("source multi_photon_prob must be >= 0");
                   }
                   if (s.mean_mu > 0.0 &&
                       !(s.multi_photon_prob < poisson_multi_photon_probability(s.mean_mu))) {
                     throw ConfigError(
                         "source multi_photon_prob must be below the Poissonian value for "
                         "mean_mu");
                   }
                   const auto d = support_probabilities(s);
                   constexpr double eps = 1e-12;
                   if (d.p0 < -eps || d.p1 < -eps) {
                     throw ConfigError(
                         "sub-Poissonian source infeasible: no distribution on {0,1,2} has "
                         "this mean and multi_photon_prob");
                   }
                 },
             },
             source);
}

double generating_function(const SourceModel& source, double z) {
  return std::visit(Overloaded{
                        [z](const IdealSinglePhoton&) { return z; },
                        [z](const WeakCoherent& s) { return std::exp(s.mean_mu * (z - 1.0)); },
                        [z](const SubPoissonian& s) {
                          const auto d = support_probabilities(s);
                          return d.p0 + d.p1 * z + d.p2 * z * z;
                        },
                    },
                    source);
}

double multi_photon_probability(const SourceModel& source, double t) {
  return std::visit(Overloaded{
                        [](const IdealSinglePhoton&) { return 0.0; },
                        [t](const WeakCoherent& s) {
                          return poisson_multi_photon_probability(s.mean_mu * t);
                        },
                        [t](const SubPoissonian& s) {
                          // Only a two-photon emission with both photons surviving.
                          return support_probabilities(s).p2 * t * t;
                        },
                    },
                    source);
}

const char* source_name(const SourceModel& source) noexcept {
  return std::visit(Overloaded{
                        [](const IdealSinglePhoton&) { return "ideal"; },
                        [](const WeakCoherent&) { return "coherent"; },
                        [](const SubPoissonian&) { return "subpoissonian"; },
                    },
                    source);
}

void validate(const DetectorModel& detector) {
  if (!(detector.efficiency >= 0.0 && detector.efficiency <= 1.0)) {
    throw ConfigError("detector efficiency must lie in [0, 1]");
  }
  if (!(detector.dark_count_prob >= 0.0 && detector.dark_count_prob < 1.0)) {
    throw ConfigError("detector dark_count_prob must lie in [0, 1)");
  }
}

double transmittance(double length_km, double atten_db_per_km) {
  return std::pow(10.0, -atten_db_per_km * length_km / 10.0);
}

PhotonPulse attenuate(PhotonPulse pulse, double t, RandomStream& rand) {
  if (t >= 1.0) return pulse;
  std::uint32_t survivors = 0;
  for (std::uint32_t i = 0; i < pulse.photon_count; ++i) {
    if (rand.bernoulli(t)) ++survivors;
  }
  pulse.photon_count = survivors;
  return pulse;
}

double fiber_delay_s(double length_km, double group_index) {
  return length_km * 1000.0 * group_index / kSpeedOfLight;
}

double classical_delay_s(double path_km) { return path_km * 1000.0 / kSpeedOfLight; }

PhotonPulse emit(const SourceModel& source, const PureState& state, std::int64_t slot,
                 RandomStream& rand) {
  validate(source);
  const std::uint32_t count = std::visit(
      Overloaded{
          [](const IdealSinglePhoton&) -> std::uint32_t { return 1; },
          [&rand](const WeakCoherent& s) -> std::uint32_t {
            if (s.mean_mu <= 0.0) return 0;
            std::poisson_distribution<std::uint32_t> poisson(s.mean_mu);
            return poisson(rand);
          },
          [&rand](const SubPoissonian& s) -> std::uint32_t {
            const auto d = support_probabilities(s);
            const double u = rand.uniform();
            if (u < d.p2) return 2;
            if (u < d.p2 + d.p1) return 1;
            return 0;
          },
      },
      source);
  return PhotonPulse{count, state, slot};
}

DetectionEvent detect(const DetectorModel& detector, const PhotonPulse& pulse,
                      RandomStream& rand) {
  std::uint32_t registered = 0;
  for (std::uint32_t i = 0; i < pulse.photon_count; ++i) {
    if (rand.bernoulli(detector.efficiency)) ++registered;
  }
  const std::uint32_t dark = rand.bernoulli(detector.dark_count_prob) ? 1 : 0;
  DetectionEvent event;
  event.clicked = registered + dark >= 1;
  event.photon_registered = registered >= 1;
  if (detector.number_resolving) event.resolved_count = registered + dark;
  return event;
}

}  // namespace b92
