#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "gpwells/potential.hpp"

using namespace gpwells;

namespace {
// Brute-force maximum of the distance transform on a 2001^2 grid.
constexpr double kLShapeInradius = 0.585786;

PotentialSpec two_disks() {
  return make_potential({Disk{Point(-3, 0), 1.0}, Disk{Point(3, 0), 0.6}});
}

Polygon l_shape() {
  return Polygon{{Point(0, 0), Point(2, 0), Point(2, 1), Point(1, 1), Point(1, 2), Point(0, 2)}};
}
}  // namespace

TEST_CASE("potential vanishes on the wells and grows with the distance") {
  const auto disk = make_potential({Disk{Point(0, 0), 1.0}});
  CHECK(evaluate(disk, Point(0.5, 0)) == 0.0);
  CHECK(evaluate(disk, Point(1.0, 0)) == 0.0);
  CHECK(evaluate(disk, Point(3, 0)) == doctest::Approx(4.0));
  const auto ring = make_potential({Annulus{Point(0, 0), 1, 2}});
  CHECK(evaluate(ring, Point(0, 0)) == doctest::Approx(1.0));
  CHECK(evaluate(ring, Point(1.5, 0)) == 0.0);
  const auto cubic = make_potential({Disk{Point(0, 0), 1.0}}, 3);
  CHECK(evaluate(cubic, Point(0, 3)) == doctest::Approx(8.0));
}

TEST_CASE("radial override replaces the well construction") {
  PotentialSpec s;
  s.radial = RadialProfile{Point(0, 0), 1.0, 2.0};
  s.validate();
  CHECK(evaluate(s, Point(1, 1)) == doctest::Approx(2.0));
  s.wells.push_back(Disk{});
  CHECK_THROWS_AS(s.validate(), ConfigurationError);
}

TEST_CASE("signed distances at the centers") {
  CHECK(signed_distance(Disk{Point(0, 0), 1}, Point(0, 0)) == doctest::Approx(-1.0));
  CHECK(signed_distance(Rectangle{Point(1, 1), 2, 1}, Point(1, 1)) == doctest::Approx(-1.0));
  const Polygon square{{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}};
  CHECK(signed_distance(square, Point(0.5, 0.5)) == doctest::Approx(-0.5));
  CHECK(signed_distance(square, Point(2, 0.5)) == doctest::Approx(1.0));
  CHECK(signed_distance(Annulus{Point(0, 0), 1, 2}, Point(2.5, 0)) == doctest::Approx(0.5));
}

TEST_CASE("inradius and incenters per shape") {
  const WellInfo d = well_info(Disk{Point(1, 2), 0.7}, 1e-6);
  CHECK(d.inradius == doctest::Approx(0.7));
  REQUIRE(d.incenters.size() == 1);
  CHECK((d.incenters[0] - Point(1, 2)).norm() < 1e-12);

  const WellInfo a = well_info(Annulus{Point(0, 0), 1, 2}, 1e-6);
  CHECK(a.inradius == doctest::Approx(0.5));
  REQUIRE(a.incenters.size() > 8);
  for (const auto& c : a.incenters) CHECK(c.norm() == doctest::Approx(1.5));

  const WellInfo r = well_info(Rectangle{Point(0, 0), 2, 1}, 1e-6);
  CHECK(r.inradius == doctest::Approx(1.0));
  for (const auto& c : r.incenters) {
    CHECK(std::abs(c.y()) < 1e-12);
    CHECK(std::abs(c.x()) <= 1.0 + 1e-12);
  }
}

TEST_CASE("L-shaped polygon inradius matches the distance-transform oracle") {
  const WellInfo w = well_info(l_shape(), 1e-7);
  CHECK(w.inradius == doctest::Approx(kLShapeInradius).epsilon(1e-5));
  REQUIRE(!w.incenters.empty());
  for (const auto& c : w.incenters)
    CHECK(-signed_distance(l_shape(), c) == doctest::Approx(w.inradius).epsilon(1e-6));
}

TEST_CASE("largest inradius picks the winners") {
  const auto lr = largest_inradius(two_disks());
  CHECK(lr.R == doctest::Approx(1.0));
  REQUIRE(lr.winners.size() == 1);
  CHECK(lr.winners[0] == 0);

  const auto tie =
      largest_inradius(make_potential({Disk{Point(-3, 0), 1.0}, Disk{Point(3, 0), 1.0}}));
  CHECK(tie.winners == std::vector<int>{0, 1});

  const auto mixed = largest_inradius(
      make_potential({Disk{Point(0, 0), 0.9}, Annulus{Point(10, 0), 1.0, 2.9}}));
  CHECK(mixed.R == doctest::Approx(0.95));
  CHECK(mixed.winners == std::vector<int>{1});
}

TEST_CASE("invalid geometry is rejected") {
  CHECK_THROWS_AS(make_potential({Disk{Point(0, 0), 1}, Disk{Point(1, 0), 1}}), GeometryError);
  CHECK_THROWS_AS(make_potential({Disk{Point(0, 0), 0}}), GeometryError);
  CHECK_THROWS_AS(make_potential({Annulus{Point(0, 0), 2, 1}}), GeometryError);
  CHECK_THROWS_AS(make_potential({Polygon{{Point(0, 0), Point(1, 0)}}}), GeometryError);
  CHECK_THROWS_AS(make_potential({Polygon{{Point(0, 0), Point(0, 1), Point(1, 1), Point(1, 0)}}}),
                  GeometryError);
  CHECK_THROWS_AS(
      make_potential({Polygon{{Point(0, 0), Point(1, 1), Point(1, 0), Point(0, 1)}}}),
      GeometryError);
  CHECK_THROWS_AS(make_potential({Disk{}}, 0.5), ConfigurationError);
}

TEST_CASE("nearest well and union distance") {
  const auto s = two_disks();
  CHECK(nearest_well(s, Point(-2.5, 0.1)) == 0);
  CHECK(nearest_well(s, Point(2.0, 0.0)) == 1);
  CHECK(union_signed_distance(s, Point(0, 0)) == doctest::Approx(2.0));
}

TEST_CASE("sampled potential matches pointwise evaluation, ring included") {
  const auto s = two_disks();
  const Grid g(64, 6.0);
  const FieldD V = sample_potential(s, g);
  CHECK(V(0, 0) == doctest::Approx(evaluate(s, g.point(0, 0))));
  CHECK(V(10, 40) == doctest::Approx(evaluate(s, g.point(40, 10))));
  CHECK(V.values().minCoeff() == 0.0);
}

TEST_CASE("potential text round trip and hash") {
  PotentialSpec s = make_potential(
      {Disk{Point(-3, 0.25), 1.0}, Rectangle{Point(3, 3), 0.5, 0.25}, l_shape()}, 2.5);
  s.wells.push_back(Annulus{Point(-8, -8), 1.0 / 3.0, 2.0});
  const std::string text = format_potential(s);
  const PotentialSpec back = parse_potential(text);
  CHECK(format_potential(back) == text);
  CHECK(potential_hash(back) == potential_hash(s));
  CHECK(potential_hash(two_disks()) != potential_hash(s));

  const auto path = (std::filesystem::temp_directory_path() / "gpwells_potential.txt").string();
  save_potential(path, s);
  CHECK(format_potential(load_potential(path)) == text);
  std::filesystem::remove(path);
}

TEST_CASE("malformed potential text is a format error") {
  const std::string head = "format = gpwells-potential v1\n";
  CHECK_NOTHROW(parse_potential(head + "well = disk 0 0 1\n"));
  CHECK_THROWS_AS(parse_potential("well = disk 0 0 1\n"), FormatError);
  CHECK_THROWS_AS(parse_potential(head + "well = disk 0 0\n"), FormatError);
  CHECK_THROWS_AS(parse_potential(head + "well = blob 0 0 1\n"), FormatError);
  CHECK_THROWS_AS(parse_potential(head + "growth = two\n"), FormatError);
  CHECK_THROWS_AS(parse_potential(head + "nonsense\n"), FormatError);
}

TEST_CASE("outline points lie on the boundary") {
  for (const auto& loop : outline(Annulus{Point(0, 0), 1, 2}, 128))
    for (const auto& p : loop) CHECK(std::abs(signed_distance(Annulus{Point(0, 0), 1, 2}, p)) < 1e-12);
  CHECK(outline(l_shape()).size() == 1);
  CHECK(bounding_radius(two_disks()) == doctest::Approx(4.0));
}
