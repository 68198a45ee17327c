#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "gpwells/field_io.hpp"
#include "gpwells/townes.hpp"

using namespace gpwells;

namespace {

template <typename F>
FieldD sample(const Grid& g, F f) {
  FieldD u(g);
  for (int iy = 1; iy < g.n - 1; ++iy)
    for (int ix = 1; ix < g.n - 1; ++ix) u(iy, ix) = f(g.coord(ix), g.coord(iy));
  return u;
}

// Unit-mass Gaussian exp(-|x - c|^2 / (2 s^2)) / (sqrt(pi) s).
FieldD gaussian(const Grid& g, double s = 1, double cx = 0, double cy = 0) {
  return sample(g, [&](double x, double y) {
    const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    return std::exp(-r2 / (2 * s * s)) / (std::sqrt(M_PI) * s);
  });
}

FieldD harmonic(const Grid& g) {
  return sample(g, [](double x, double y) { return x * x + y * y; });
}

}  // namespace

TEST_CASE("mass of simple fields") {
  const Grid g(256, 12.0);
  CHECK(mass(FieldD(g)) == 0.0);
  CHECK(std::abs(mass(gaussian(g)) - 1.0) < 1e-6);
}

TEST_CASE("Gaussian energy pieces match the closed forms") {
  const Grid g(256, 12.0);
  const FieldD u = gaussian(g);
  const FieldD zero(g);
  for (double a : {0.0, 2.0, 5.0}) {
    const Energy e = energy(u, zero, a);
    CHECK(std::abs(e.kinetic - 1.0) < 1e-4);
    CHECK(std::abs(e.quartic - 1.0 / (2 * M_PI)) < 1e-6);
    CHECK(std::abs(e.total - (1.0 - a / (4 * M_PI))) < 1e-4);
  }
}

TEST_CASE("embedded Townes field has zero energy at the critical strength") {
  const TownesProfile& p = reference_townes();
  const Grid g(256, 12.0);
  const FieldD u = q_on_grid(p, g, Point(0, 0), 1.0);
  const Energy e = energy(u, FieldD(g), p.a_star);
  CHECK(std::abs(e.total) < 2e-3 * e.kinetic);
}

TEST_CASE("harmonic ground state has energy 2") {
  const Grid g(256, 8.0);
  const Energy e = energy(gaussian(g), harmonic(g), 0.0);
  CHECK(std::abs(e.total - 2.0) < 1e-3);
}

TEST_CASE("Gagliardo-Nirenberg ratio stays below one on random bump fields") {
  const double a_star = reference_townes().a_star;
  const Grid g(128, 10.0);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> pos(-5, 5), width(0.5, 2.0), amp(0.1, 1.0);
  std::uniform_int_distribution<int> count(1, 6);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = count(rng);
    std::vector<std::array<double, 4>> bumps(k);
    for (auto& b : bumps) b = {pos(rng), pos(rng), width(rng), amp(rng)};
    const FieldD u = sample(g, [&](double x, double y) {
      double s = 0;
      for (const auto& b : bumps)
        s += b[3] * std::exp(-((x - b[0]) * (x - b[0]) + (y - b[1]) * (y - b[1])) / (2 * b[2] * b[2]));
      return s;
    });
    worst = std::max(worst, gn_ratio(u, a_star));
  }
  CHECK(worst <= 1.01);
  CHECK(worst > 0.5);
}

TEST_CASE("Gagliardo-Nirenberg ratio of the optimizer and of a Gaussian") {
  const TownesProfile& p = reference_townes();
  const Grid g(256, 12.0);
  CHECK(std::abs(gn_ratio(q_on_grid(p, g, Point(0, 0), 1.0), p.a_star) - 1.0) < 1e-3);
  CHECK(gn_ratio(gaussian(g), p.a_star) == doctest::Approx(p.a_star / (4 * M_PI)).epsilon(1e-4));
  CHECK_THROWS_AS(gn_ratio(FieldD(g), p.a_star), DomainError);
}

TEST_CASE("H1 distance") {
  const Grid g(256, 12.0);
  const FieldD u = gaussian(g);
  CHECK(h1_distance(u, u) == 0.0);
  CHECK(h1_distance(u, FieldD(g)) == doctest::Approx(std::sqrt(mass(u) + kinetic(u))));
  const double d = 0.5;
  const FieldD v = gaussian(g, 1, d, 0);
  const double exact = std::sqrt(4 - std::exp(-d * d / 4) * (4 - d * d / 2));
  CHECK(std::abs(h1_distance(u, v) - exact) < 1e-4);
  CHECK_THROWS_AS(h1_distance(u, gaussian(Grid(128, 12.0))), GridMismatchError);
}

TEST_CASE("kinetic quadrature converges at the stencil order") {
  for (Stencil s : {Stencil::second_order, Stencil::fourth_order}) {
    double err[3];
    int n = 65;
    for (double& e : err) {
      e = std::abs(kinetic(gaussian(Grid(n, 10.0, s))) - 1.0);
      n = 2 * n - 1;
    }
    const double order = s == Stencil::second_order ? 2 : 4;
    CHECK(err[0] / err[1] > 0.9 * std::pow(2.0, order));
    CHECK(err[1] / err[2] > 0.9 * std::pow(2.0, order));
  }
}

TEST_CASE("stencil application agrees with the assembled operator") {
  for (Stencil s : {Stencil::second_order, Stencil::fourth_order}) {
    const Grid g(40, 3.0, s);
    const FieldD u = sample(g, [](double x, double y) { return std::sin(x + 2 * y) + x * y; });
    const auto A = assemble_operator(g);
    const VectorX<double> lhs = neg_laplacian(u).interior();
    const VectorX<double> rhs = A * u.interior();
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-10 * rhs.lpNorm<Eigen::Infinity>());
    CHECK((A - Eigen::SparseMatrix<double>(A.transpose())).norm() == 0.0);
  }
}

TEST_CASE("grid and field preconditions") {
  CHECK_THROWS_AS(Grid(8, 1.0), ConfigurationError);
  CHECK_THROWS_AS(Grid(64, 0.0), ConfigurationError);
  const Grid g(32, 2.0);
  FieldD u(g);
  u(3, 3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(energy(u, FieldD(g), 1.0), NumericError);
  CHECK_THROWS_AS(FieldD(g, FieldArray<double>::Zero(5, 5)), GridMismatchError);
  CHECK(FieldD::from_interior(g, gaussian(g).interior()).values().isApprox(gaussian(g).values()));
}

TEST_CASE("field file round trip is bit exact") {
  const Grid g(64, 3.7);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  FieldD u(g);
  for (int iy = 1; iy < g.n - 1; ++iy)
    for (int ix = 1; ix < g.n - 1; ++ix) u(iy, ix) = nd(rng);
  const auto path = (std::filesystem::temp_directory_path() / "gpwells_field.gpf").string();
  save_field(path, u);
  const FieldD back = load_field(path);
  CHECK(back.grid() == g);
  CHECK(std::memcmp(back.values().data(), u.values().data(), sizeof(double) * g.n * g.n) == 0);
  CHECK(encode_field(back) == encode_field(u));
  std::filesystem::remove(path);
}

TEST_CASE("corrupt field files are format errors") {
  const FieldD u = gaussian(Grid(32, 4.0));
  std::string bytes = encode_field(u);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_field(bad_magic), FormatError);
  CHECK_THROWS_AS(decode_field(bytes.substr(0, bytes.size() - 8)), FormatError);
  std::string bad_n = bytes;
  bad_n[4] = char(33);
  CHECK_THROWS_AS(decode_field(bad_n), FormatError);
  CHECK_THROWS_AS(load_field("/nonexistent/gpwells.gpf"), FormatError);
}
