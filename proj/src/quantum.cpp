#include "b92/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "b92/errors.hpp"

namespace b92 {

PureState::PureState(Amplitude amp0, Amplitude amp1) : amp0_(amp0), amp1_(amp1) {
  const double n = norm_squared();
  if (!(std::abs(n - 1.0) <= kNormTolerance)) {
    throw DomainError("state is not normalized: |amp0|^2 + |amp1|^2 = " + std::to_string(n));
  }
}

Amplitude inner(const PureState& lhs, const PureState& rhs) noexcept {
  return std::conj(lhs.amp0()) * rhs.amp0() + std::conj(lhs.amp1()) * rhs.amp1();
}

ProtocolGeometry make_geometry(double phi) {
  if (!(phi > 0.0 && phi <= std::numbers::pi / 2)) {
    throw DomainError("phi must lie in (0, pi/2], got " + std::to_string(phi));
  }
  const double c = std::cos(phi / 2);
  const double s = std::sin(phi / 2);
  // Orthogonality of each (psi, psi_bar) pair is exact in floating point:
  // both inner products reduce to c*s - s*c.
  return ProtocolGeometry{phi, PureState{c, s}, PureState{c, -s}, PureState{-s, c},
                          PureState{s, c}};
}

MeasurementBasis::MeasurementBasis(PureState outcome_a, PureState outcome_b)
    : a_(outcome_a), b_(outcome_b) {
  if (std::abs(inner(a_, b_)) > kNormTolerance) {
    throw DomainError("measurement basis vectors are not orthogonal");
  }
}

double born_probability(const PureState& state, const PureState& outcome) {
  // PureState cannot be constructed unnormalized, so the domain check lives in
  // its constructor.
  return std::min(1.0, std::norm(inner(outcome, state)));
}

BasisOutcome sample_projective(const PureState& state, const MeasurementBasis& basis,
                               RandomStream& rand) {
  const double p_b = born_probability(state, basis.outcome_b());
  return rand.uniform() < p_b ? BasisOutcome::B : BasisOutcome::A;
}

int identify_signal(const ProtocolGeometry& geometry, const PureState& state) {
  const double f1 = born_probability(state, geometry.psi1);
  const double f2 = born_probability(state, geometry.psi2);
  constexpr double tol = 1e-12;
  const bool is1 = f1 >= 1.0 - tol;
  const bool is2 = f2 >= 1.0 - tol;
  if (is1 && (!is2 || f1 >= f2)) return 1;
  if (is2) return 2;
  throw DomainError("discrimination input is neither psi1 nor psi2");
}

DiscriminationDetail discriminate_detailed(const ProtocolGeometry& geometry,
                                           DiscriminationStrategy strategy,
                                           const PureState& state, RandomStream& rand) {
  identify_signal(geometry, state);

  switch (strategy) {
    case DiscriminationStrategy::ProjectiveRandomBasis: {
      // Bob-mirroring: fair coin between {psi1, psi1_bar} and {psi2, psi2_bar}.
      // Landing on psi1_bar rules out psi1, landing on psi2_bar rules out psi2.
      if (rand.uniform() < 0.5) {
        const MeasurementBasis basis{geometry.psi1, geometry.psi1_bar};
        if (sample_projective(state, basis, rand) == BasisOutcome::B) {
          return {EveOutcome::DefinitelyPsi2, 1, false};
        }
        return {EveOutcome::Inconclusive, 1, true};
      }
      const MeasurementBasis basis{geometry.psi2, geometry.psi2_bar};
      if (sample_projective(state, basis, rand) == BasisOutcome::B) {
        return {EveOutcome::DefinitelyPsi1, 2, false};
      }
      return {EveOutcome::Inconclusive, 2, true};
    }
    case DiscriminationStrategy::OptimalUnambiguous: {
      // Equal-prior IDP POVM: E1 = |psi2_bar><psi2_bar| / (1 + |<psi1|psi2>|),
      // E2 = |psi1_bar><psi1_bar| / (1 + |<psi1|psi2>|), E0 = I - E1 - E2.
      const double scale = 1.0 / (1.0 + std::abs(inner(geometry.psi1, geometry.psi2)));
      const double p1 = scale * born_probability(state, geometry.psi2_bar);
      const double p2 = scale * born_probability(state, geometry.psi1_bar);
      const double u = rand.uniform();
      if (u < p1) return {EveOutcome::DefinitelyPsi1, 0, false};
      if (u < p1 + p2) return {EveOutcome::DefinitelyPsi2, 0, false};
      return {EveOutcome::Inconclusive, 0, false};
    }
  }
  throw DomainError("unknown discrimination strategy");
}

EveOutcome discriminate(const ProtocolGeometry& geometry, DiscriminationStrategy strategy,
                        const PureState& state, RandomStream& rand) {
  return discriminate_detailed(geometry, strategy, state, rand).outcome;
}

double success_probability(const ProtocolGeometry& geometry, DiscriminationStrategy strategy) {
  const double s = std::sin(geometry.phi);
  switch (strategy) {
    case DiscriminationStrategy::ProjectiveRandomBasis:
      return 0.5 * s * s;
    case DiscriminationStrategy::OptimalUnambiguous:
      return 1.0 - std::cos(geometry.phi);
  }
  return 0.0;
}

const char* to_string(DiscriminationStrategy strategy) noexcept {
  switch (strategy) {
    case DiscriminationStrategy::ProjectiveRandomBasis:
      return "projective";
    case DiscriminationStrategy::OptimalUnambiguous:
      return "optimal";
  }
  return "unknown";
}

}  // namespace b92
