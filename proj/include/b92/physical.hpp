#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "b92/quantum.hpp"
#include "b92/random.hpp"

namespace b92 {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct FiberSegment {
  double length_km = 0.0;
  double atten_db_per_km = 0.2;
  double group_index = 1.5;
};

/// Throws ConfigError when a field violates its physical range.
void validate(const FiberSegment& fiber);

struct IdealSinglePhoton {
  friend bool operator==(const IdealSinglePhoton&, const IdealSinglePhoton&) = default;
};

/// Poissonian photon number with mean `mean_mu`.
struct WeakCoherent {
  double mean_mu = 0.1;
  friend bool operator==(const WeakCoherent&, const WeakCoherent&) = default;
};

/// Photon number on {0, 1, 2} with the given mean and P(n >= 2) = multi_photon_prob.
struct SubPoissonian {
  double mean_mu = 1.0;
  double multi_photon_prob = 0.0;
  friend bool operator==(const SubPoissonian&, const SubPoissonian&) = default;
};

using SourceModel = std::variant<IdealSinglePhoton, WeakCoherent, SubPoissonian>;

/// Throws ConfigError for negative means and for sub-Poissonian parameters that
/// admit no distribution on {0,1,2} or are not below the Poissonian
/// multi-photon probability.
void validate(const SourceModel& source);

/// Probabilities of 0, 1 and 2 photons for a validated SubPoissonian source.
struct ThreePointDistribution {
  double p0;
  double p1;
  double p2;
};
ThreePointDistribution support_probabilities(const SubPoissonian& source);

/// Probability generating function E[z^N] of the emitted photon number.
double generating_function(const SourceModel& source, double z);

/// P(N >= 2) after every photon independently survives with probability t.
double multi_photon_probability(const SourceModel& source, double t = 1.0);

/// 1 - e^-mu - mu e^-mu
double poisson_multi_photon_probability(double mean_mu);

const char* source_name(const SourceModel& source) noexcept;

struct DetectorModel {
  double efficiency = 1.0;
  double dark_count_prob = 0.0;
  bool number_resolving = false;
};

void validate(const DetectorModel& detector);

struct PhotonPulse {
  std::uint32_t photon_count = 0;
  PureState state{1.0, 0.0};
  std::int64_t slot_index = 0;
};

struct DetectionEvent {
  bool clicked = false;
  std::optional<std::uint32_t> resolved_count;
  bool photon_registered = false;  // at least one signal photon (not only dark counts)
};

/// 10^(-atten * length / 10)
double transmittance(double length_km, double atten_db_per_km);

/// Each photon survives independently with probability t.
PhotonPulse attenuate(PhotonPulse pulse, double t, RandomStream& rand);

double fiber_delay_s(double length_km, double group_index);

double classical_delay_s(double path_km);

PhotonPulse emit(const SourceModel& source, const PureState& state, std::int64_t slot,
                 RandomStream& rand);

/// One uniform draw per photon for efficiency, then one for the dark count.
DetectionEvent detect(const DetectorModel& detector, const PhotonPulse& pulse,
                      RandomStream& rand);

}  // namespace b92
