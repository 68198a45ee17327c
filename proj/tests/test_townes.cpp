#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gpwells/townes.hpp"

using namespace gpwells;

namespace {
// Independent DOP853 shooting (rtol 1e-13) plus K0 tail quadrature.
constexpr double kOracleQ0 = 2.206200864651;
constexpr double kOracleAStar = 11.7008965245;
}  // namespace

TEST_CASE("shoot classifies the two sides of Q(0)") {
  CHECK(shoot(0.1, 20, 40000).classification == ShotClass::undershoot);
  CHECK(shoot(1.0, 20, 40000).classification == ShotClass::undershoot);
  CHECK(shoot(2.2, 20, 40000).classification == ShotClass::undershoot);
  CHECK(shoot(2.2063, 20, 40000).classification == ShotClass::overshoot);
  CHECK(shoot(3.0, 20, 40000).classification == ShotClass::overshoot);
  CHECK(shoot(10.0, 20, 40000).classification == ShotClass::overshoot);
}

TEST_CASE("near-critical undershoot stays positive and decreasing until it turns") {
  const Shot s = shoot(2.2062, 20, 40000);
  REQUIRE(s.classification == ShotClass::undershoot);
  CHECK(s.r_event == doctest::Approx(8.665).epsilon(0.01));
  for (std::size_t j = 1; j + 1 < s.q.size(); ++j) {
    REQUIRE(s.q[j] > 0);
    REQUIRE(s.dq[j] < 0);
  }
}

TEST_CASE("shoot rejects bad input and reports non-finite states") {
  CHECK_THROWS_AS(shoot(0.0, 20, 100), ConfigurationError);
  CHECK_THROWS_AS(shoot(-1.0, 20, 100), ConfigurationError);
  try {
    shoot(1e200, 20, 100);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.last_valid_r() == 0.0);
    CHECK(std::string(e.kind()) == "integration");
  }
}

TEST_CASE("solve_townes reproduces the oracle constants") {
  const TownesProfile p = solve_townes(1e-10);
  CHECK(std::abs(p.q0 - kOracleQ0) < 1e-8);
  CHECK(std::abs(p.a_star - kOracleAStar) / kOracleAStar < 1e-7);
  CHECK(std::abs(p.decay_rate - 1.0) < 0.02);
  const auto id = townes_identities(p);
  CHECK(id.k_over_m < 1e-6);
  CHECK(id.two_k_over_p < 1e-6);
  CHECK(id.two_m_over_p < 1e-6);
}

TEST_CASE("profile is strictly positive and strictly decreasing") {
  const TownesProfile& p = reference_townes();
  for (int j = 1; j < p.n_r; ++j) {
    REQUIRE(p.q[j] > 0);
    REQUIRE(p.q[j] < p.q[j - 1]);
  }
  CHECK(p.r_trust > 5);
  CHECK(p.r_trust < p.r_max);
}

TEST_CASE("bisection brackets shrink and their endpoints keep their class") {
  const TownesProfile& p = reference_townes();
  REQUIRE(p.brackets.size() > 10);
  for (std::size_t i = 1; i < p.brackets.size(); ++i) {
    const double w0 = p.brackets[i - 1].second - p.brackets[i - 1].first;
    const double w1 = p.brackets[i].second - p.brackets[i].first;
    REQUIRE(w1 < w0);
  }
  for (std::size_t i = 0; i < p.brackets.size(); i += 5) {
    CHECK(shoot(p.brackets[i].first, p.r_max, p.n_r).classification == ShotClass::undershoot);
    CHECK(shoot(p.brackets[i].second, p.r_max, p.n_r).classification == ShotClass::overshoot);
  }
}

TEST_CASE("tolerance outside (0, 1e-3] is a configuration error") {
  CHECK_THROWS_AS(solve_townes(0.0), ConfigurationError);
  CHECK_THROWS_AS(solve_townes(1e-2), ConfigurationError);
}

TEST_CASE("truncation at r_max = 3 is detected by the identities") {
  const TownesProfile p = solve_townes(1e-10, 3.0, 6000);
  CHECK(townes_identities(p).max_residual() > 1e-3);
}

TEST_CASE("rescaled profile Q(2r) has K/M = 4") {
  const TownesProfile s = scaled_profile(reference_townes(), 2.0);
  const auto id = townes_identities(s);
  CHECK(id.kinetic / id.mass == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(id.k_over_m > 2.9);
}

TEST_CASE("halving the radial step converges a_star at better than first order") {
  const double a0 = solve_townes(1e-12, 20, 1000).a_star;
  const double a1 = solve_townes(1e-12, 20, 2000).a_star;
  const double a2 = solve_townes(1e-12, 20, 4000).a_star;
  const double d1 = std::abs(a1 - a0), d2 = std::abs(a2 - a1);
  CHECK(d2 < d1 / 3.0);
}

TEST_CASE("Hermite interpolation matches the samples and the tail is continuous") {
  const TownesProfile& p = reference_townes();
  for (int j : {0, 1, 777, 20000, p.n_r - 2}) CHECK(p.value(p.radius(j)) == doctest::Approx(p.q[j]).epsilon(1e-12));
  CHECK(p.value(p.r_max * (1 + 1e-12)) == doctest::Approx(p.q.back()).epsilon(1e-6));
  CHECK(p.value(25.0) > 0);
  CHECK(p.derivative(0.0) == doctest::Approx(0.0));
}

TEST_CASE("profile text file round-trips the samples") {
  const TownesProfile& p = reference_townes();
  const auto path = (std::filesystem::temp_directory_path() / "gpwells_townes_roundtrip.txt").string();
  save_profile(path, p);
  const TownesProfile back = load_profile(path);
  CHECK(back.n_r == p.n_r);
  CHECK(back.r_max == p.r_max);
  CHECK(back.q0 == p.q0);
  CHECK(back.a_star == p.a_star);
  bool same = true;
  for (int j = 0; j < p.n_r; ++j) same = same && back.q[j] == p.q[j];
  CHECK(same);
  CHECK(std::abs(back.decay_rate - 1.0) < 0.02);
  std::filesystem::remove(path);
}

TEST_CASE("malformed profile files are format errors") {
  const auto path = (std::filesystem::temp_directory_path() / "gpwells_townes_bad.txt").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("TOWNES v2 10 20 2.2 11.7\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_profile(path), FormatError);
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("TOWNES v1 10 20 2.2 11.7\n0 2.2\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_profile(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("embedded Townes field has unit mass and is a GN optimizer") {
  const TownesProfile& p = reference_townes();
  const Grid g(256, 12.0);
  const FieldD u = q_on_grid(p, g, Point(0, 0), 1.0);
  CHECK(std::abs(mass(u) - 1.0) < 1e-4);
  CHECK(std::abs(gn_ratio(u, p.a_star) - 1.0) < 1e-3);
  CHECK(u.is_dirichlet());
  const FieldD w = q_on_grid(p, g, Point(0.3, -0.2), 0.7);
  CHECK(std::abs(mass(w) - 0.49) < 1e-4);
  CHECK_THROWS_AS(q_on_grid(p, g, Point(0, 0), g.h()), ResolutionError);
}

TEST_CASE("Simpson is exact on cubics") {
  std::vector<double> f(11);
  for (int j = 0; j <= 10; ++j) f[j] = std::pow(0.1 * j, 3);
  CHECK(simpson(f, 0.1) == doctest::Approx(0.25).epsilon(1e-14));
}
