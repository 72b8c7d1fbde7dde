#pragma once

#include <complex>
#include <cstdint>

#include "b92/random.hpp"

namespace b92 {

using Amplitude = std::complex<double>;

inline constexpr double kNormTolerance = 1e-12;

/// Normalized qubit pure state. Construction validates |a0|^2 + |a1|^2 = 1.
class PureState {
 public:
  PureState(Amplitude amp0, Amplitude amp1);

  const Amplitude& amp0() const noexcept { return amp0_; }
  const Amplitude& amp1() const noexcept { return amp1_; }

  double norm_squared() const noexcept { return std::norm(amp0_) + std::norm(amp1_); }

  friend bool operator==(const PureState&, const PureState&) = default;

 private:
  Amplitude amp0_;
  Amplitude amp1_;
};

/// <lhs|rhs>
Amplitude inner(const PureState& lhs, const PureState& rhs) noexcept;

/// Two nonorthogonal signal states and the vectors orthogonal to each.
///
/// Canonical real embedding: psi1 = (cos(phi/2), sin(phi/2)),
/// psi2 = (cos(phi/2), -sin(phi/2)), so <psi1|psi2> = cos(phi) and
/// |<psi1|psi2_bar>|^2 = |<psi2|psi1_bar>|^2 = sin^2(phi).
struct ProtocolGeometry {
  double phi;
  PureState psi1;
  PureState psi2;
  PureState psi1_bar;
  PureState psi2_bar;
};

/// Throws DomainError unless 0 < phi <= pi/2.
ProtocolGeometry make_geometry(double phi);

class MeasurementBasis {
 public:
  MeasurementBasis(PureState outcome_a, PureState outcome_b);

  const PureState& outcome_a() const noexcept { return a_; }
  const PureState& outcome_b() const noexcept { return b_; }

 private:
  PureState a_;
  PureState b_;
};

enum class BasisOutcome : std::uint8_t { A, B };

enum class EveOutcome : std::uint8_t { Inconclusive = 0, DefinitelyPsi1 = 1, DefinitelyPsi2 = 2 };

enum class DiscriminationStrategy : std::uint8_t { ProjectiveRandomBasis, OptimalUnambiguous };

/// |<outcome|state>|^2
double born_probability(const PureState& state, const PureState& outcome);

/// Projective measurement consuming exactly one uniform draw. Returns B iff the
/// draw falls below born_probability(state, outcome_b), so an outcome with zero
/// Born weight is never produced.
BasisOutcome sample_projective(const PureState& state, const MeasurementBasis& basis,
                               RandomStream& rand);

/// Detailed result of one discrimination attempt. `basis` is 1 or 2 for the
/// projective strategy (the {psi_k, psi_k_bar} basis Eve chose) and 0 for the
/// POVM; `landed_on_signal` tells whether a projective measurement collapsed
/// onto psi_k itself (the inconclusive port).
struct DiscriminationDetail {
  EveOutcome outcome;
  int basis;
  bool landed_on_signal;
};

/// Unambiguous discrimination of a single carrier known to be psi1 or psi2.
/// DefinitelyPsi1 is only ever returned for psi1 and DefinitelyPsi2 for psi2.
/// Throws DomainError when `state` is neither signal state.
EveOutcome discriminate(const ProtocolGeometry& geometry, DiscriminationStrategy strategy,
                        const PureState& state, RandomStream& rand);

DiscriminationDetail discriminate_detailed(const ProtocolGeometry& geometry,
                                           DiscriminationStrategy strategy,
                                           const PureState& state, RandomStream& rand);

/// Analytic conclusive probability: sin^2(phi)/2 for the random-basis
/// projective strategy and 1 - cos(phi) for the optimal unambiguous POVM.
double success_probability(const ProtocolGeometry& geometry, DiscriminationStrategy strategy);

/// Which signal state `state` is (1 or 2); DomainError otherwise.
int identify_signal(const ProtocolGeometry& geometry, const PureState& state);

const char* to_string(DiscriminationStrategy strategy) noexcept;

}  // namespace b92
