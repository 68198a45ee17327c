#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "gpwells/asymptotics.hpp"

using namespace gpwells;

namespace {

const TownesProfile& townes() { return reference_townes(); }
double a_star() { return townes().a_star; }

PotentialSpec unit_disk() { return make_potential({Disk{Point(0, 0), 1.0}}); }

PotentialSpec harmonic_spec() {
  PotentialSpec s;
  s.radial = RadialProfile{Point(0, 0), 1.0, 2.0};
  return s;
}

SolverConfig fast_config() {
  SolverConfig c;
  c.flow_steps = 10;
  return c;
}

// Small single-disk sweep shared by several cases.
const SweepResult& disk_sweep() {
  static const SweepResult r = run_sweep(unit_disk(), Grid(128, 3.0),
                                         {0.5 * a_star(), 0.8 * a_star(), 0.9 * a_star(), 0.95 * a_star()},
                                         fast_config(), townes());
  return r;
}

}  // namespace

TEST_CASE("embedded Townes field has a small eps-mode profile error") {
  const Grid g(256, 8.0);
  for (double s : {0.5, 1.0}) {
    GroundState gs;
    gs.u = q_on_grid(townes(), g, Point(0.1, -0.05), s);
    gs.u.values() /= s;
    gs.eps = 1.0 / std::sqrt(kinetic(gs.u));
    gs.a = 0.9 * a_star();
    CHECK(gs.eps == doctest::Approx(s).epsilon(1e-3));
    CHECK(rescaled_profile_error(gs, townes(), ProfileMode::eps) < 2e-3);
  }
}

TEST_CASE("profile error preconditions") {
  const Grid g(64, 2.0);
  GroundState gs;
  gs.u = q_on_grid(townes(), g, Point(0, 0), 0.3);
  gs.eps = 5.0;
  CHECK_THROWS_AS(rescaled_profile_error(gs, townes(), ProfileMode::eps), ResolutionError);
  gs.eps = 0.3;
  CHECK_THROWS_AS(rescaled_profile_error(gs, townes(), ProfileMode::log), ConfigurationError);
}

TEST_CASE("refined peak and bilinear interpolation") {
  const Grid g(101, 2.0);
  FieldD u(g);
  const Point c(0.0123, -0.031);
  for (int iy = 1; iy < g.n - 1; ++iy)
    for (int ix = 1; ix < g.n - 1; ++ix) u(iy, ix) = std::exp(-(g.point(ix, iy) - c).squaredNorm());
  CHECK((refined_peak(u) - c).norm() < 0.05 * g.h());

  FieldD b(g);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) b(iy, ix) = 1 + 2 * g.coord(ix) - g.coord(iy) + 0.5 * g.coord(ix) * g.coord(iy);
  const Point x(0.3217, -1.111);
  CHECK(bilinear(b, x) == doctest::Approx(1 + 2 * x.x() - x.y() + 0.5 * x.x() * x.y()).epsilon(1e-12));
  CHECK(bilinear(b, Point(5, 0)) == 0.0);
}

TEST_CASE("sweep records") {
  const SweepResult& r = disk_sweep();
  REQUIRE(r.records.size() == 4);
  CHECK(r.spec_hash == potential_hash(unit_disk()));
  double prev_potential = INFINITY;
  for (const auto& rec : r.records) {
    CHECK(rec.converged);
    CHECK(rec.gap == doctest::Approx(a_star() - rec.a));
    CHECK(rec.winner == 0);
    CHECK(rec.energy_ratio > 0);
    CHECK(rec.eps_ratio > 0);
    CHECK(rec.e <= rec.trial_energy);
    CHECK(rec.e >= rec.gap * rec.kinetic / a_star() + rec.potential - 1e-9);
    CHECK(rec.potential < prev_potential);
    prev_potential = rec.potential;
  }
  CHECK(zero_set_attraction(r, unit_disk()) == 0.0);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    if (std::isfinite(r.records[i - 1].profile_h1_err))
      CHECK(r.records[i].profile_h1_err < r.records[i - 1].profile_h1_err);
    CHECK(std::isfinite(r.records[i].profile_h1_err));
    CHECK(r.records[i].eps < r.records[i - 1].eps);
  }
}

TEST_CASE("sweep input validation") {
  const Grid g(128, 3.0);
  CHECK_THROWS_AS(run_sweep(unit_disk(), g, {}, fast_config(), townes()), ConfigurationError);
  CHECK_THROWS_AS(run_sweep(unit_disk(), g, {2.0, 1.0}, fast_config(), townes()), ConfigurationError);
  CHECK_THROWS_AS(run_sweep(unit_disk(), g, {1.0, a_star()}, fast_config(), townes()), ConfigurationError);
}

TEST_CASE("cold starts agree with warm starts and with each other across threads") {
  const Grid g(128, 3.0);
  const std::vector<double> as{0.3 * a_star(), 0.6 * a_star(), 0.9 * a_star()};
  SweepOptions cold;
  cold.warm_start = false;
  SolverConfig cfg = fast_config();
  cfg.init = TownesInit{Point(0, 0), 0.5};
  const SweepResult one = run_sweep(unit_disk(), g, as, cfg, townes(), cold);
  cold.threads = 3;
  const SweepResult three = run_sweep(unit_disk(), g, as, cfg, townes(), cold);
  CHECK(sweep_csv(one) == sweep_csv(three));
  const SweepResult warm = run_sweep(unit_disk(), g, as, cfg, townes());
  for (std::size_t i = 0; i < as.size(); ++i)
    CHECK(std::abs(warm.records[i].e - one.records[i].e) <= 10 * cfg.tol_energy);
}

TEST_CASE("sweep CSV is deterministic and round-trips") {
  const SweepResult& r = disk_sweep();
  const std::string text = sweep_csv(r);
  CHECK(text.rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);
  const auto back = parse_sweep_csv(text);
  REQUIRE(back.size() == r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].a == r.records[i].a);
    CHECK(back[i].e == r.records[i].e);
    CHECK(back[i].zbar == r.records[i].zbar);
    CHECK(back[i].winner == r.records[i].winner);
    CHECK(back[i].eps_ratio == r.records[i].eps_ratio);
  }
  const auto path = (std::filesystem::temp_directory_path() / "gpwells_sweep.csv").string();
  write_sweep_csv(path, r);
  CHECK(read_sweep_csv(path).size() == r.records.size());
  std::filesystem::remove(path);

  const SweepResult again = run_sweep(unit_disk(), Grid(128, 3.0),
                                      {0.5 * a_star(), 0.8 * a_star(), 0.9 * a_star(), 0.95 * a_star()},
                                      fast_config(), townes());
  CHECK(sweep_csv(again) == text);

  CHECK_THROWS_AS(parse_sweep_csv("a,b\n"), FormatError);
  CHECK_THROWS_AS(parse_sweep_csv(std::string(kSweepCsvHeader) + "\n1,2,3\n"), FormatError);
}

TEST_CASE("derivative identity on a harmonic trap") {
  const Grid g(96, 6.0);
  const SweepResult r =
      run_sweep(harmonic_spec(), g, {0.2 * a_star(), 0.3 * a_star(), 0.4 * a_star()}, fast_config(), townes());
  const auto d = derivative_check(r);
  REQUIRE(d.size() == 1);
  CHECK_FALSE(d[0].one_sided);
  CHECK(d[0].a_mid == r.records[1].a);
  CHECK(d[0].relerr < 1e-2);

  SweepResult two = r;
  two.records.pop_back();
  CHECK(derivative_check(two).empty());
}

TEST_CASE("derivative at a = 0 matches the first perturbation term") {
  const Grid g(96, 6.0);
  const auto spec = harmonic_spec();
  const double da = 0.005 * a_star();
  const SweepResult r = run_sweep(spec, g, {0.0, da, 2 * da}, fast_config(), townes());
  const auto d = derivative_check(r);
  REQUIRE(d.size() == 2);
  CHECK(d[0].one_sided);
  const Eigenpair ep = eigen_oracle(sample_potential(spec, g));
  CHECK(d[0].rhs == doctest::Approx(-0.5 * quartic(ep.v)).epsilon(1e-6));
  CHECK(d[0].relerr < 1e-2);
}

TEST_CASE("symmetry diagnostics") {
  const Grid g(96, 6.0);
  const GroundState gs = solve_ground_state(harmonic_spec(), g, 0.2 * a_star(), fast_config());
  const SymmetryReport s = symmetry_diagnostics(gs, harmonic_spec());
  CHECK(s.angular_variance < 1e-6);
  CHECK(s.radial_offset < 2 * g.h());
  CHECK(s.radius > 0);

  const auto two = make_potential({Disk{Point(-3, 0), 1.0}, Disk{Point(3, 0), 0.6}});
  CHECK_THROWS_AS(symmetry_diagnostics(gs, two), NotApplicableError);
}
