#include "gpwells/potential.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace gpwells {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool inside_polygon(const std::vector<Point>& v, const Point& p) {
  bool in = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = v[i];
    const Point& b = v[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

double signed_area(const std::vector<Point>& v) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

int orient(const Point& a, const Point& b, const Point& c) {
  const double o = cross(b - a, c - a);
  return (o > 0) - (o < 0);
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

void validate_shape(const WellShape& s) {
  std::visit(overloaded{
                 [](const Disk& d) {
                   if (!(d.radius > 0)) throw GeometryError("disk radius must be positive");
                 },
                 [](const Annulus& a) {
                   if (!(a.r1 > 0 && a.r2 > a.r1))
                     throw GeometryError("annulus needs 0 < r1 < r2");
                 },
                 [](const Rectangle& r) {
                   if (!(r.half_width > 0 && r.half_height > 0))
                     throw GeometryError("rectangle half extents must be positive");
                 },
                 [](const Polygon& p) {
                   const auto& v = p.vertices;
                   const std::size_t n = v.size();
                   if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
                   for (const auto& q : v)
                     if (!q.allFinite()) throw GeometryError("polygon vertex is not finite");
                   const double area = signed_area(v);
                   if (std::abs(area) < 1e-12) throw GeometryError("polygon has zero area");
                   if (area < 0) throw GeometryError("polygon vertices must be counterclockwise");
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t j = i + 1; j < n; ++j) {
                       const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
                       if (adjacent) continue;
                       if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                         throw GeometryError("polygon is not simple");
                     }
                   }
                 },
             },
             s);
}

void append_number(std::string& out, double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, r.ptr);
}

double parse_number(const std::string& tok, int line) {
  double x = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw FormatError("potential line " + std::to_string(line) + ": bad number '" + tok + "'");
  return x;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* shape_name(const WellShape& shape) {
  return std::visit(overloaded{
                        [](const Disk&) { return "disk"; },
                        [](const Annulus&) { return "annulus"; },
                        [](const Rectangle&) { return "rectangle"; },
                        [](const Polygon&) { return "polygon"; },
                    },
                    shape);
}

double signed_distance(const WellShape& shape, const Point& x) {
  return std::visit(
      overloaded{
          [&](const Disk& d) { return (x - d.center).norm() - d.radius; },
          [&](const Annulus& a) {
            const double rho = (x - a.center).norm();
            return std::max(a.r1 - rho, rho - a.r2);
          },
          [&](const Rectangle& r) {
            const double qx = std::abs(x.x() - r.center.x()) - r.half_width;
            const double qy = std::abs(x.y() - r.center.y()) - r.half_height;
            const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
            return outside + std::min(std::max(qx, qy), 0.0);
          },
          [&](const Polygon& p) {
            const auto& v = p.vertices;
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < v.size(); ++i)
              d = std::min(d, segment_distance(x, v[i], v[(i + 1) % v.size()]));
            return inside_polygon(v, x) ? -d : d;
          },
      },
      shape);
}

double union_signed_distance(const PotentialSpec& spec, const Point& x) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& w : spec.wells) d = std::min(d, signed_distance(w, x));
  return d;
}

int nearest_well(const PotentialSpec& spec, const Point& x) {
  int best = -1;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.wells.size(); ++i) {
    const double s = signed_distance(spec.wells[i], x);
    if (s < d) {
      d = s;
      best = int(i);
    }
  }
  return best;
}

double evaluate(const PotentialSpec& spec, const Point& x) {
  if (spec.radial) {
    const auto& r = *spec.radial;
    const double rho = (x - r.center).norm();
    return rho == 0 ? 0.0 : r.coefficient * std::pow(rho, r.exponent);
  }
  const double d = union_signed_distance(spec, x);
  if (d <= 0) return 0.0;
  return spec.growth == 2 ? d * d : std::pow(d, spec.growth);
}

std::vector<std::vector<Point>> outline(const WellShape& shape, int samples) {
  auto circle = [samples](const Point& c, double r) {
    std::vector<Point> pts(samples);
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * std::numbers::pi * k / samples;
      pts[k] = c + r * Point(std::cos(t), std::sin(t));
    }
    return pts;
  };
  auto polyline = [samples](const std::vector<Point>& v) {
    double perim = 0;
    for (std::size_t i = 0; i < v.size(); ++i) perim += (v[(i + 1) % v.size()] - v[i]).norm();
    std::vector<Point> pts;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % v.size()];
      const int m = std::max(1, int(std::ceil(samples * (b - a).norm() / perim)));
      for (int k = 0; k < m; ++k) pts.push_back(a + (b - a) * (double(k) / m));
    }
    return pts;
  };
  return std::visit(
      overloaded{
          [&](const Disk& d) { return std::vector<std::vector<Point>>{circle(d.center, d.radius)}; },
          [&](const Annulus& a) {
            return std::vector<std::vector<Point>>{circle(a.center, a.r1), circle(a.center, a.r2)};
          },
          [&](const Rectangle& r) {
            const Point c = r.center;
            const double w = r.half_width, h = r.half_height;
            return std::vector<std::vector<Point>>{polyline(
                {c + Point(-w, -h), c + Point(w, -h), c + Point(w, h), c + Point(-w, h)})};
          },
          [&](const Polygon& p) { return std::vector<std::vector<Point>>{polyline(p.vertices)}; },
      },
      shape);
}

void PotentialSpec::validate() const {
  if (radial) {
    if (!(radial->coefficient > 0) || !(radial->exponent > 0))
      throw ConfigurationError("radial profile needs positive coefficient and exponent");
    if (!wells.empty()) throw ConfigurationError("radial profile cannot be combined with wells");
    return;
  }
  if (wells.empty()) throw ConfigurationError("potential needs at least one well");
  if (!(growth >= 1) || !std::isfinite(growth))
    throw ConfigurationError("growth exponent must be >= 1");
  for (const auto& w : wells) validate_shape(w);
  for (std::size_t i = 0; i < wells.size(); ++i) {
    for (std::size_t j = 0; j < wells.size(); ++j) {
      if (i == j) continue;
      for (const auto& curve : outline(wells[i], 1024))
        for (const auto& p : curve)
          if (!(signed_distance(wells[j], p) > 0))
            throw GeometryError("wells " + std::to_string(i) + " and " + std::to_string(j) +
                                " are not disjoint");
    }
  }
}

PotentialSpec make_potential(std::vector<WellShape> wells, double growth,
                             std::optional<RadialProfile> radial) {
  PotentialSpec s;
  s.wells = std::move(wells);
  s.growth = growth;
  s.radial = radial;
  s.validate();
  return s;
}

WellInfo well_info(const WellShape& shape, double tol, int index) {
  if (!(tol > 0)) throw ConfigurationError("well_info: tol must be positive");
  validate_shape(shape);
  WellInfo info;
  info.index = index;
  std::visit(
      overloaded{
          [&](const Disk& d) {
            info.inradius = d.radius;
            info.incenters = {d.center};
          },
          [&](const Annulus& a) {
            info.inradius = 0.5 * (a.r2 - a.r1);
            info.incenters = outline(Disk{a.center, 0.5 * (a.r1 + a.r2)}, 64).front();
          },
          [&](const Rectangle& r) {
            info.inradius = std::min(r.half_width, r.half_height);
            const double reach = std::abs(r.half_width - r.half_height);
            const Point dir = r.half_width >= r.half_height ? Point(1, 0) : Point(0, 1);
            if (reach == 0) {
              info.incenters = {r.center};
            } else {
              for (int k = 0; k <= 16; ++k)
                info.incenters.push_back(r.center + dir * (reach * (-1.0 + k / 8.0)));
            }
          },
          [&](const Polygon& p) {
            auto depth = [&](const Point& x) { return -signed_distance(shape, x); };
            Point lo = p.vertices.front(), hi = lo;
            for (const auto& v : p.vertices) {
              lo = lo.cwiseMin(v);
              hi = hi.cwiseMax(v);
            }
            const int m = 64;
            const Point span = hi - lo;
            std::vector<std::pair<double, Point>> seeds;
            for (int iy = 0; iy <= m; ++iy)
              for (int ix = 0; ix <= m; ++ix) {
                const Point x = lo + Point(span.x() * ix / m, span.y() * iy / m);
                const double d = depth(x);
                if (d > 0) seeds.emplace_back(d, x);
              }
            if (seeds.empty()) throw GeometryError("polygon interior not found");
            std::sort(seeds.begin(), seeds.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
            if (seeds.size() > 16) seeds.resize(16);
            // Pattern search from the deepest coarse samples.
            std::vector<std::pair<double, Point>> found;
            for (auto [d, x] : seeds) {
              double step = std::max(span.x(), span.y()) / m;
              while (step > 0.25 * tol) {
                bool moved = false;
                for (int k = 0; k < 8; ++k) {
                  const double t = std::numbers::pi / 4 * k;
                  const Point y = x + step * Point(std::cos(t), std::sin(t));
                  const double dy = depth(y);
                  if (dy > d) {
                    d = dy;
                    x = y;
                    moved = true;
                  }
                }
                if (!moved) step *= 0.5;
              }
              found.emplace_back(d, x);
            }
            double best = 0;
            for (const auto& f : found) best = std::max(best, f.first);
            info.inradius = best;
            for (const auto& [d, x] : found) {
              if (d < best - tol) continue;
              const bool dup = std::any_of(info.incenters.begin(), info.incenters.end(),
                                           [&](const Point& c) { return (c - x).norm() < 10 * tol; });
              if (!dup) info.incenters.push_back(x);
            }
          },
      },
      shape);
  return info;
}

LargestInradius largest_inradius(const PotentialSpec& spec, double tol) {
  if (spec.wells.empty()) throw ConfigurationError("largest_inradius: potential has no wells");
  LargestInradius out;
  for (std::size_t i = 0; i < spec.wells.size(); ++i) {
    out.wells.push_back(well_info(spec.wells[i], tol, int(i)));
    out.R = std::max(out.R, out.wells.back().inradius);
  }
  for (const auto& w : out.wells)
    if (w.inradius >= out.R - tol) out.winners.push_back(w.index);
  return out;
}

double bounding_radius(const PotentialSpec& spec) {
  if (spec.radial) return spec.radial->center.norm();
  double r = 0;
  for (const auto& w : spec.wells) {
    std::visit(overloaded{
                   [&](const Disk& d) { r = std::max(r, d.center.norm() + d.radius); },
                   [&](const Annulus& a) { r = std::max(r, a.center.norm() + a.r2); },
                   [&](const Rectangle& q) {
                     r = std::max(r, (q.center.cwiseAbs() + Point(q.half_width, q.half_height)).norm());
                   },
                   [&](const Polygon& p) {
                     for (const auto& v : p.vertices) r = std::max(r, v.norm());
                   },
               },
               w);
  }
  return r;
}

FieldD sample_potential(const PotentialSpec& spec, const Grid& grid) {
  FieldD V(grid);
  auto& v = V.values();
  for (int iy = 0; iy < grid.n; ++iy)
    for (int ix = 0; ix < grid.n; ++ix) v(iy, ix) = evaluate(spec, grid.point(ix, iy));
  return V;
}

std::string format_potential(const PotentialSpec& spec) {
  std::string out = "format = gpwells-potential v1\n";
  out += "growth = ";
  append_number(out, spec.growth);
  out += '\n';
  auto nums = [&](std::initializer_list<double> xs) {
    for (double x : xs) {
      out += ' ';
      append_number(out, x);
    }
  };
  for (const auto& w : spec.wells) {
    out += "well = ";
    out += shape_name(w);
    std::visit(overloaded{
                   [&](const Disk& d) { nums({d.center.x(), d.center.y(), d.radius}); },
                   [&](const Annulus& a) { nums({a.center.x(), a.center.y(), a.r1, a.r2}); },
                   [&](const Rectangle& r) {
                     nums({r.center.x(), r.center.y(), r.half_width, r.half_height});
                   },
                   [&](const Polygon& p) {
                     for (const auto& v : p.vertices) nums({v.x(), v.y()});
                   },
               },
               w);
    out += '\n';
  }
  if (spec.radial) {
    const auto& r = *spec.radial;
    out += "radial =";
    nums({r.center.x(), r.center.y(), r.coefficient, r.exponent});
    out += '\n';
  }
  return out;
}

PotentialSpec parse_potential(const std::string& text) {
  PotentialSpec spec;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_format = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw FormatError("potential line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    std::istringstream vs(s.substr(eq + 1));
    std::vector<std::string> tok;
    for (std::string t; vs >> t;) tok.push_back(t);
    auto numbers = [&](std::size_t from) {
      std::vector<double> x;
      for (std::size_t i = from; i < tok.size(); ++i) x.push_back(parse_number(tok[i], line));
      return x;
    };
    auto need = [&](std::size_t got, std::size_t want, const char* what) {
      if (got != want)
        throw FormatError("potential line " + std::to_string(line) + ": " + what + " needs " +
                          std::to_string(want) + " numbers");
    };
    if (key == "format") {
      if (tok.size() != 2 || tok[0] != "gpwells-potential" || tok[1] != "v1")
        throw FormatError("unsupported potential format");
      have_format = true;
    } else if (key == "growth") {
      const auto x = numbers(0);
      need(x.size(), 1, "growth");
      spec.growth = x[0];
    } else if (key == "radial") {
      const auto x = numbers(0);
      need(x.size(), 4, "radial");
      spec.radial = RadialProfile{Point(x[0], x[1]), x[2], x[3]};
    } else if (key == "well") {
      if (tok.empty()) throw FormatError("potential line " + std::to_string(line) + ": empty well");
      const auto x = numbers(1);
      if (tok[0] == "disk") {
        need(x.size(), 3, "disk");
        spec.wells.push_back(Disk{Point(x[0], x[1]), x[2]});
      } else if (tok[0] == "annulus") {
        need(x.size(), 4, "annulus");
        spec.wells.push_back(Annulus{Point(x[0], x[1]), x[2], x[3]});
      } else if (tok[0] == "rectangle") {
        need(x.size(), 4, "rectangle");
        spec.wells.push_back(Rectangle{Point(x[0], x[1]), x[2], x[3]});
      } else if (tok[0] == "polygon") {
        if (x.size() < 6 || x.size() % 2)
          throw FormatError("potential line " + std::to_string(line) +
                            ": polygon needs an even count of at least 6 numbers");
        Polygon p;
        for (std::size_t i = 0; i < x.size(); i += 2) p.vertices.emplace_back(x[i], x[i + 1]);
        spec.wells.push_back(std::move(p));
      } else {
        throw FormatError("potential line " + std::to_string(line) + ": unknown shape '" + tok[0] + "'");
      }
    } else {
      throw FormatError("potential line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (!have_format) throw FormatError("potential file lacks 'format = gpwells-potential v1'");
  spec.validate();
  return spec;
}

void save_potential(const std::string& path, const PotentialSpec& spec) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << format_potential(spec);
  if (!f) throw FormatError("short write to " + path);
}

PotentialSpec load_potential(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_potential(ss.str());
}

std::uint64_t potential_hash(const PotentialSpec& spec) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : format_potential(spec)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gpwells
