#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "b92/errors.hpp"
#include "b92/quantum.hpp"
#include "test_support.hpp"

using namespace b92;
using b92::testing::fraction;
using b92::testing::within_sigmas;

namespace {
constexpr double pi = std::numbers::pi;
const std::array<double, 4> kPhiGrid = {pi / 6, pi / 4, pi / 3, pi / 2};
}  // namespace

TEST_CASE("PureState rejects unnormalized amplitudes") {
  CHECK_NOTHROW(PureState(1.0, 0.0));
  CHECK_NOTHROW(PureState(Amplitude(0.0, 1.0 / std::sqrt(2.0)), 1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(PureState(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(PureState(0.0, 0.0), DomainError);
}

TEST_CASE("make_geometry examples") {
  const auto g2 = make_geometry(pi / 2);
  CHECK(std::abs(inner(g2.psi1, g2.psi2)) < 1e-12);

  const auto g4 = make_geometry(pi / 4);
  CHECK(std::pow(std::sin(g4.phi), 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::norm(inner(g4.psi1, g4.psi2)) == doctest::Approx(0.5).epsilon(1e-12));

  const auto g3 = make_geometry(pi / 3);
  CHECK(std::norm(inner(g3.psi1, g3.psi2_bar)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("make_geometry invariants across (0, pi/2]") {
  for (int i = 1; i <= 100; ++i) {
    const double phi = (pi / 2) * i / 100.0;
    const auto g = make_geometry(phi);
    const double s2 = std::pow(std::sin(phi), 2);
    CHECK(std::abs(inner(g.psi1, g.psi1_bar)) < 1e-12);
    CHECK(std::abs(inner(g.psi2, g.psi2_bar)) < 1e-12);
    CHECK(std::abs(std::norm(inner(g.psi1, g.psi2_bar)) - s2) < 1e-12);
    CHECK(std::abs(std::norm(inner(g.psi2, g.psi1_bar)) - s2) < 1e-12);
    CHECK(std::abs(inner(g.psi1, g.psi2).real() - std::cos(phi)) < 1e-12);
    for (const auto* s : {&g.psi1, &g.psi2, &g.psi1_bar, &g.psi2_bar}) {
      CHECK(std::abs(s->norm_squared() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("make_geometry domain") {
  CHECK_THROWS_AS(make_geometry(0.0), DomainError);
  CHECK_THROWS_AS(make_geometry(-0.1), DomainError);
  CHECK_THROWS_AS(make_geometry(pi / 2 + 1e-9), DomainError);
  CHECK_THROWS_AS(make_geometry(std::nan("")), DomainError);
}

TEST_CASE("MeasurementBasis requires orthogonal outcomes") {
  const auto g = make_geometry(pi / 4);
  CHECK_NOTHROW(MeasurementBasis(g.psi1, g.psi1_bar));
  CHECK_THROWS_AS(MeasurementBasis(g.psi1, g.psi2), DomainError);
}

TEST_CASE("born_probability examples") {
  const auto g = make_geometry(pi / 4);
  CHECK(born_probability(g.psi1, g.psi1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(born_probability(g.psi1, g.psi1_bar) == doctest::Approx(0.0));
  CHECK(born_probability(g.psi1, g.psi2_bar) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sample_projective") {
  RandomStream rand(7);
  constexpr std::size_t n = 100000;

  SUBCASE("eigenstate always lands on outcome a") {
    const auto g = make_geometry(pi / 4);
    const MeasurementBasis basis{g.psi1, g.psi1_bar};
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(sample_projective(g.psi1, basis, rand) == BasisOutcome::A);
    }
  }

  SUBCASE("frequencies follow the Born rule") {
    const auto g4 = make_geometry(pi / 4);
    const auto g3 = make_geometry(pi / 3);
    const MeasurementBasis b2{g4.psi2, g4.psi2_bar};
    const MeasurementBasis b1{g3.psi1, g3.psi1_bar};
    std::size_t hits4 = 0, hits3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sample_projective(g4.psi1, b2, rand) == BasisOutcome::B) ++hits4;
      if (sample_projective(g3.psi2, b1, rand) == BasisOutcome::B) ++hits3;
    }
    CHECK(std::abs(fraction(hits4, n) - 0.5) <= 0.01);
    CHECK(std::abs(fraction(hits3, n) - 0.75) <= 0.01);
    CHECK(within_sigmas(fraction(hits4, n), born_probability(g4.psi1, g4.psi2_bar), n));
    CHECK(within_sigmas(fraction(hits3, n), born_probability(g3.psi2, g3.psi1_bar), n));
  }

  SUBCASE("consumes exactly one draw") {
    const auto g = make_geometry(pi / 3);
    RandomStream a(99), b(99);
    sample_projective(g.psi1, MeasurementBasis{g.psi2, g.psi2_bar}, a);
    b();
    CHECK(a() == b());
  }
}

TEST_CASE("discriminate conclusive fractions") {
  constexpr std::size_t n = 100000;
  RandomStream rand(2024);
  auto conclusive_fraction = [&](double phi, DiscriminationStrategy strategy) {
    const auto g = make_geometry(phi);
    std::size_t conclusive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const PureState& s = rand.uniform() < 0.5 ? g.psi1 : g.psi2;
      if (discriminate(g, strategy, s, rand) != EveOutcome::Inconclusive) ++conclusive;
    }
    return fraction(conclusive, n);
  };
  CHECK(std::abs(conclusive_fraction(pi / 4, DiscriminationStrategy::ProjectiveRandomBasis) -
                 0.25) <= 0.01);
  CHECK(std::abs(conclusive_fraction(pi / 2, DiscriminationStrategy::ProjectiveRandomBasis) -
                 0.5) <= 0.01);
  CHECK(std::abs(conclusive_fraction(pi / 4, DiscriminationStrategy::OptimalUnambiguous) -
                 0.29289) <= 0.01);

  for (const double phi : kPhiGrid) {
    for (const auto strategy : {DiscriminationStrategy::ProjectiveRandomBasis,
                                DiscriminationStrategy::OptimalUnambiguous}) {
      CAPTURE(phi);
      const double expected = success_probability(make_geometry(phi), strategy);
      CHECK(within_sigmas(conclusive_fraction(phi, strategy), expected, n));
    }
  }
}

TEST_CASE("discriminate never misidentifies") {
  RandomStream rand(5);
  for (int i = 1; i <= 20; ++i) {
    const auto g = make_geometry((pi / 2) * i / 20.0);
    for (const auto strategy : {DiscriminationStrategy::ProjectiveRandomBasis,
                                DiscriminationStrategy::OptimalUnambiguous}) {
      for (int k = 0; k < 5000; ++k) {
        REQUIRE(discriminate(g, strategy, g.psi1, rand) != EveOutcome::DefinitelyPsi2);
        REQUIRE(discriminate(g, strategy, g.psi2, rand) != EveOutcome::DefinitelyPsi1);
      }
    }
  }
}

TEST_CASE("discriminate rejects superpositions") {
  RandomStream rand(1);
  const auto g = make_geometry(pi / 4);
  CHECK_THROWS_AS(discriminate(g, DiscriminationStrategy::ProjectiveRandomBasis, g.psi1_bar, rand),
                  DomainError);
  CHECK_THROWS_AS(discriminate(g, DiscriminationStrategy::OptimalUnambiguous, PureState(1.0, 0.0),
                               rand),
                  DomainError);
}

TEST_CASE("success_probability examples and dominance") {
  CHECK(success_probability(make_geometry(pi / 4), DiscriminationStrategy::ProjectiveRandomBasis) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(success_probability(make_geometry(pi / 2), DiscriminationStrategy::ProjectiveRandomBasis) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(success_probability(make_geometry(pi / 4), DiscriminationStrategy::OptimalUnambiguous) ==
        doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));

  for (int i = 1; i <= 100; ++i) {
    const auto g = make_geometry((pi / 2) * i / 100.0);
    CHECK(success_probability(g, DiscriminationStrategy::OptimalUnambiguous) >=
          success_probability(g, DiscriminationStrategy::ProjectiveRandomBasis));
  }
}

TEST_CASE("optimal POVM brute force") {
  // Explicit 2x2 POVM elements built from the oracle vectors.
  for (const double phi : kPhiGrid) {
    CAPTURE(phi);
    const b92::testing::OracleStates st(phi);
    const double c = std::cos(phi);
    auto projector = [](const b92::testing::Vec2& v) {
      return std::array<double, 4>{v[0] * v[0], v[0] * v[1], v[1] * v[0], v[1] * v[1]};
    };
    const auto p1 = projector(st.bar[1]);
    const auto p2 = projector(st.bar[0]);
    std::array<double, 4> e1{}, e2{}, e0{};
    for (int k = 0; k < 4; ++k) {
      e1[k] = p1[k] / (1.0 + c);
      e2[k] = p2[k] / (1.0 + c);
      e0[k] = (k == 0 || k == 3 ? 1.0 : 0.0) - e1[k] - e2[k];
    }
    // E0 positive semidefinite: trace and determinant non-negative.
    CHECK(e0[0] + e0[3] >= -1e-12);
    CHECK(e0[0] * e0[3] - e0[1] * e0[2] >= -1e-12);

    auto expect = [](const std::array<double, 4>& m, const b92::testing::Vec2& v) {
      return v[0] * (m[0] * v[0] + m[1] * v[1]) + v[1] * (m[2] * v[0] + m[3] * v[1]);
    };
    CHECK(expect(e1, st.psi[1]) == doctest::Approx(0.0));
    CHECK(expect(e2, st.psi[0]) == doctest::Approx(0.0));
    const double conclusive = 0.5 * (expect(e1, st.psi[0]) + expect(e2, st.psi[1]));
    CHECK(conclusive == doctest::Approx(success_probability(
                                            make_geometry(phi),
                                            DiscriminationStrategy::OptimalUnambiguous))
                            .epsilon(1e-12));
  }
}
