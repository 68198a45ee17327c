#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gpwells/field.hpp"

namespace gpwells {

struct Disk {
  Point center{0, 0};
  double radius = 1;
};

struct Annulus {
  Point center{0, 0};
  double r1 = 1, r2 = 2;
};

struct Rectangle {
  Point center{0, 0};
  double half_width = 1, half_height = 1;
};

/// Simple polygon, vertices counterclockwise, last edge closes back to the first.
struct Polygon {
  std::vector<Point> vertices;
};

using WellShape = std::variant<Disk, Annulus, Rectangle, Polygon>;

/// V(x) = coefficient * |x - center|^exponent, replacing the well construction.
struct RadialProfile {
  Point center{0, 0};
  double coefficient = 1;
  double exponent = 2;
};

/// V(x) = dist(x, closure of the wells)^growth, or the radial override.
struct PotentialSpec {
  std::vector<WellShape> wells;
  double growth = 2;
  std::optional<RadialProfile> radial;

  /// Throws GeometryError for degenerate or overlapping wells and
  /// ConfigurationError for bad exponents.
  void validate() const;
};

PotentialSpec make_potential(std::vector<WellShape> wells, double growth = 2,
                             std::optional<RadialProfile> radial = std::nullopt);

/// Negative inside, zero on the boundary.
double signed_distance(const WellShape& shape, const Point& x);
double evaluate(const PotentialSpec& spec, const Point& x);

/// Smallest signed distance over the wells, +inf with no wells.
double union_signed_distance(const PotentialSpec& spec, const Point& x);
/// Index of the well minimizing the signed distance at x, -1 without wells.
int nearest_well(const PotentialSpec& spec, const Point& x);

struct WellInfo {
  int index = 0;
  double inradius = 0;
  std::vector<Point> incenters;
};

WellInfo well_info(const WellShape& shape, double tol, int index = 0);

struct LargestInradius {
  double R = 0;
  std::vector<int> winners;
  std::vector<WellInfo> wells;
};

LargestInradius largest_inradius(const PotentialSpec& spec, double tol = 1e-6);

/// max |x| over the closure of the wells (the radial center if there are none).
double bounding_radius(const PotentialSpec& spec);

/// Boundary polyline of a shape, `samples` points per closed curve.
std::vector<std::vector<Point>> outline(const WellShape& shape, int samples = 256);

const char* shape_name(const WellShape& shape);

/// V on every node of the grid, ring included.
FieldD sample_potential(const PotentialSpec& spec, const Grid& grid);

/// Key-value text format, one `key = value` per line, `#` comments:
///   format = gpwells-potential v1
///   growth = 2
///   well = disk cx cy r
///   well = annulus cx cy r1 r2
///   well = rectangle cx cy half_width half_height
///   well = polygon x1 y1 x2 y2 ...
///   radial = cx cy coefficient exponent
/// Numbers are written in shortest round-trip form.
std::string format_potential(const PotentialSpec& spec);
PotentialSpec parse_potential(const std::string& text);
void save_potential(const std::string& path, const PotentialSpec& spec);
PotentialSpec load_potential(const std::string& path);

/// FNV-1a of the canonical text form.
std::uint64_t potential_hash(const PotentialSpec& spec);

}  // namespace gpwells
