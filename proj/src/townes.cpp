#include "gpwells/townes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gpwells {
namespace {

struct State {
  double q, p;
};

State rhs(double r, const State& s) {
  // Regular singular point: Q''(0) = (Q - Q^3) / 2 when Q'(0) = 0.
  if (r == 0.0) return {s.p, 0.5 * (s.q - s.q * s.q * s.q)};
  return {s.p, -s.p / r + s.q - s.q * s.q * s.q};
}

State rk4(double r, const State& s, double h) {
  const State k1 = rhs(r, s);
  const State k2 = rhs(r + 0.5 * h, {s.q + 0.5 * h * k1.q, s.p + 0.5 * h * k1.p});
  const State k3 = rhs(r + 0.5 * h, {s.q + 0.5 * h * k2.q, s.p + 0.5 * h * k2.p});
  const State k4 = rhs(r + h, {s.q + h * k3.q, s.p + h * k3.p});
  return {s.q + h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
          s.p + h / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p)};
}

double bessel_k0(double r) { return std::cyl_bessel_k(0.0, r); }
double bessel_k1(double r) { return std::cyl_bessel_k(1.0, r); }

/// Least-squares slope of ln(Q sqrt(r)) over [r_lo, r_hi].
double fit_decay(const std::vector<double>& q, double dr, double r_lo, double r_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  const int j0 = int(std::ceil(r_lo / dr));
  const int j1 = std::min(int(std::floor(r_hi / dr)), int(q.size()) - 1);
  for (int j = std::max(j0, 1); j <= j1; ++j) {
    if (!(q[j] > 0)) break;
    const double r = j * dr;
    const double y = std::log(q[j] * std::sqrt(r));
    sx += r; sy += y; sxx += r * r; sxy += r * y; ++cnt;
  }
  if (cnt < 3) return std::nan("");
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return -slope;
}

double radial_integral(const TownesProfile& p, auto&& integrand) {
  std::vector<double> f(p.q.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = integrand(j) * p.radius(int(j));
  return 2.0 * std::numbers::pi * simpson(f, p.dr());
}

}  // namespace

const char* to_string(ShotClass c) {
  switch (c) {
    case ShotClass::undershoot: return "undershoot";
    case ShotClass::overshoot: return "overshoot";
    default: return "undecided";
  }
}

double simpson(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  std::size_t last = n - 1;
  double tail = 0.0;
  if (last % 2 == 1) {
    tail = 0.5 * dx * (f[last - 1] + f[last]);
    --last;
  }
  double s = f[0] + f[last];
  for (std::size_t j = 1; j < last; ++j) s += (j % 2 ? 4.0 : 2.0) * f[j];
  return s * dx / 3.0 + tail;
}

Shot shoot(double q0, double r_max, int n_r) {
  if (!(q0 > 0)) throw ConfigurationError("shoot: q0 must be positive");
  if (n_r < 3 || !(r_max > 0)) throw ConfigurationError("shoot: bad radial grid");
  const double h = r_max / double(n_r - 1);
  Shot shot;
  shot.q.reserve(n_r);
  shot.dq.reserve(n_r);
  State s{q0, 0.0};
  shot.q.push_back(s.q);
  shot.dq.push_back(s.p);
  for (int j = 0; j + 1 < n_r; ++j) {
    const double r = j * h;
    const State next = rk4(r, s, h);
    if (!std::isfinite(next.q) || !std::isfinite(next.p))
      throw IntegrationError("shoot: non-finite state", r);
    s = next;
    shot.q.push_back(s.q);
    shot.dq.push_back(s.p);
    if (s.q < 0) {
      shot.classification = ShotClass::overshoot;
      shot.r_event = r + h;
      return shot;
    }
    if (s.p >= 0) {
      shot.classification = ShotClass::undershoot;
      shot.r_event = r + h;
      return shot;
    }
  }
  shot.r_event = r_max;
  return shot;
}

TownesProfile solve_townes(double tol, double r_max, int n_r) {
  if (!(tol > 0 && tol <= 1e-3)) throw ConfigurationError("solve_townes: tol must lie in (0, 1e-3]");
  double lo = 0.1, hi = 10.0;
  if (shoot(lo, r_max, n_r).classification != ShotClass::undershoot ||
      shoot(hi, r_max, n_r).classification != ShotClass::overshoot)
    throw ConfigurationError("solve_townes: no shooting bracket in [0.1, 10]");

  TownesProfile p;
  p.r_max = r_max;
  p.n_r = n_r;
  p.brackets.emplace_back(lo, hi);
  bool separated = true;
  while (hi - lo >= tol * 0.5 * (lo + hi)) {
    const double mid = 0.5 * (lo + hi);
    const ShotClass c = shoot(mid, r_max, n_r).classification;
    if (c == ShotClass::undecided) {
      separated = false;  // truncation radius cannot separate further
      break;
    }
    (c == ShotClass::undershoot ? lo : hi) = mid;
    p.brackets.emplace_back(lo, hi);
  }
  p.q0 = 0.5 * (lo + hi);

  const Shot mid = shoot(p.q0, r_max, n_r);
  const Shot slo = shoot(lo, r_max, n_r);
  const Shot shi = shoot(hi, r_max, n_r);
  // Trust the midpoint trajectory while the bracket trajectories agree. An
  // unseparated bracket is wide, so only the sign conditions apply then.
  const std::size_t limit =
      separated ? std::min({mid.q.size(), slo.q.size(), shi.q.size()}) : mid.q.size();
  std::size_t j_trust = limit - 1;
  for (std::size_t j = 1; j < limit; ++j) {
    if (!(mid.q[j] > 0) || mid.dq[j] >= 0 ||
        (separated && std::abs(shi.q[j] - slo.q[j]) > 1e-3 * mid.q[j])) {
      j_trust = j - 1;
      break;
    }
  }
  if (mid.classification == ShotClass::undecided && limit == std::size_t(n_r)) {
    j_trust = std::size_t(n_r) - 1;
  }

  p.q.assign(n_r, 0.0);
  p.dq.assign(n_r, 0.0);
  for (std::size_t j = 0; j <= j_trust; ++j) {
    p.q[j] = mid.q[j];
    p.dq[j] = mid.dq[j];
  }
  p.r_trust = p.radius(int(j_trust));
  if (j_trust + 1 < std::size_t(n_r) && p.r_trust > 0) {
    // Beyond r_trust the cubic term is negligible and Q solves the modified
    // Bessel equation; C K_0(r) ~ C sqrt(pi/2) r^{-1/2} e^{-r}.
    p.tail_coefficient = p.q[j_trust] / bessel_k0(p.r_trust);
    for (std::size_t j = j_trust + 1; j < std::size_t(n_r); ++j) {
      const double r = p.radius(int(j));
      p.q[j] = p.tail_coefficient * bessel_k0(r);
      p.dq[j] = -p.tail_coefficient * bessel_k1(r);
    }
  }
  p.a_star = radial_integral(p, [&](std::size_t j) { return p.q[j] * p.q[j]; });
  p.decay_rate = fit_decay(p.q, p.dr(), std::max(1.0, p.r_trust - 4.0), p.r_trust);
  return p;
}

const TownesProfile& reference_townes() {
  static const TownesProfile p = solve_townes();
  return p;
}

double TownesProfile::value(double r) const {
  if (r < 0) r = -r;
  if (r >= r_max) return tail_coefficient > 0 ? tail_coefficient * bessel_k0(r) : 0.0;
  const double h = dr();
  int j = int(r / h);
  if (j >= n_r - 1) j = n_r - 2;
  const double t = (r - j * h) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * q[j] + (t3 - 2 * t2 + t) * h * dq[j] +
         (-2 * t3 + 3 * t2) * q[j + 1] + (t3 - t2) * h * dq[j + 1];
}

double TownesProfile::derivative(double r) const {
  if (r < 0) r = -r;
  if (r >= r_max) return tail_coefficient > 0 ? -tail_coefficient * bessel_k1(r) : 0.0;
  const double h = dr();
  int j = int(r / h);
  if (j >= n_r - 1) j = n_r - 2;
  const double t = (r - j * h) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * q[j] + (-6 * t2 + 6 * t) * q[j + 1]) / h +
         (3 * t2 - 4 * t + 1) * dq[j] + (3 * t2 - 2 * t) * dq[j + 1];
}

double TownesIdentities::max_residual() const {
  return std::max({k_over_m, two_k_over_p, two_m_over_p});
}

TownesIdentities townes_identities(const TownesProfile& p) {
  TownesIdentities t;
  t.kinetic = radial_integral(p, [&](std::size_t j) { return p.dq[j] * p.dq[j]; });
  t.mass = radial_integral(p, [&](std::size_t j) { return p.q[j] * p.q[j]; });
  t.quartic = radial_integral(p, [&](std::size_t j) {
    const double q2 = p.q[j] * p.q[j];
    return q2 * q2;
  });
  t.k_over_m = std::abs(t.kinetic / t.mass - 1.0);
  t.two_k_over_p = std::abs(2.0 * t.kinetic / t.quartic - 1.0);
  t.two_m_over_p = std::abs(2.0 * t.mass / t.quartic - 1.0);
  return t;
}

TownesProfile scaled_profile(const TownesProfile& p, double k) {
  if (!(k > 0)) throw ConfigurationError("scaled_profile: factor must be positive");
  TownesProfile s = p;
  for (int j = 0; j < p.n_r; ++j) {
    const double r = p.radius(j);
    s.q[j] = p.value(k * r);
    s.dq[j] = k * p.derivative(k * r);
  }
  s.q0 = s.q[0];
  s.tail_coefficient = 0.0;
  s.r_trust = std::min(p.r_max, p.r_trust / k);
  s.a_star = radial_integral(s, [&](std::size_t j) { return s.q[j] * s.q[j]; });
  s.brackets.clear();
  return s;
}

double townes_mass_beyond(const TownesProfile& p, double r) {
  if (r <= 0) return 1.0;
  if (r >= p.r_max) return 0.0;
  const int j0 = int(std::ceil(r / p.dr()));
  double s = 0.0;
  for (int j = j0; j + 1 < p.n_r; ++j) {
    const double ra = p.radius(j), rb = p.radius(j + 1);
    s += 0.5 * p.dr() * (p.q[j] * p.q[j] * ra + p.q[j + 1] * p.q[j + 1] * rb);
  }
  return 2.0 * std::numbers::pi * s / p.a_star;
}

FieldD q_on_grid(const TownesProfile& p, const Grid& grid, const Point& center, double scale) {
  if (!(scale > 2.0 * grid.h()))
    throw ResolutionError("q_on_grid: scale " + std::to_string(scale) +
                          " is not resolved by grid spacing " + std::to_string(grid.h()));
  const double amp = 1.0 / std::sqrt(p.a_star);
  FieldD u(grid);
  auto& v = u.values();
  for (int iy = 1; iy < grid.n - 1; ++iy) {
    const double dy = grid.coord(iy) - center.y();
    for (int ix = 1; ix < grid.n - 1; ++ix) {
      const double dx = grid.coord(ix) - center.x();
      v(iy, ix) = amp * p.value(std::hypot(dx, dy) / scale);
    }
  }
  return u;
}

void save_profile(const std::string& path, const TownesProfile& p) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  char buf[128];
  std::snprintf(buf, sizeof buf, "TOWNES v1 %d %.17g %.17g %.17g\n", p.n_r, p.r_max, p.q0, p.a_star);
  f << buf;
  for (int j = 0; j < p.n_r; ++j) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.radius(j), p.q[j]);
    f << buf;
  }
  if (!f) throw FormatError("short write to " + path);
}

TownesProfile load_profile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  std::string magic, version;
  TownesProfile p;
  if (!(f >> magic >> version >> p.n_r >> p.r_max >> p.q0 >> p.a_star) || magic != "TOWNES" ||
      version != "v1")
    throw FormatError(path + ": not a TOWNES v1 profile");
  if (p.n_r < 5) throw FormatError(path + ": too few samples");
  p.q.resize(p.n_r);
  for (int j = 0; j < p.n_r; ++j) {
    double r;
    if (!(f >> r >> p.q[j])) throw FormatError(path + ": truncated profile at sample " + std::to_string(j));
  }
  // Derivatives from 4th-order differences; Q'(0) = 0 by symmetry.
  const double h = p.dr();
  p.dq.assign(p.n_r, 0.0);
  auto at = [&](int j) { return j < 0 ? p.q[-j] : p.q[j]; };
  for (int j = 1; j < p.n_r; ++j) {
    if (j + 2 < p.n_r)
      p.dq[j] = (at(j - 2) - 8 * at(j - 1) + 8 * at(j + 1) - at(j + 2)) / (12 * h);
    else
      p.dq[j] = (3 * p.q[j] - 4 * p.q[j - 1] + p.q[j - 2]) / (2 * h);
  }
  p.r_trust = p.r_max;
  p.tail_coefficient = p.q.back() > 0 ? p.q.back() / bessel_k0(p.r_max) : 0.0;
  p.decay_rate = fit_decay(p.q, h, 4.0, std::min(8.0, p.r_max));
  return p;
}

}  // namespace gpwells
