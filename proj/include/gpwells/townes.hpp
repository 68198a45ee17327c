#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gpwells/field.hpp"

namespace gpwells {

/// Positive radial solution Q of -Q'' - Q'/r + Q - Q^3 = 0 sampled on a
/// uniform radial grid r_j = j * r_max / (n_r - 1).
struct TownesProfile {
  double r_max = 20.0;
  int n_r = 40000;
  std::vector<double> q;   // Q(r_j)
  std::vector<double> dq;  // Q'(r_j)
  double q0 = 0.0;
  double a_star = 0.0;     // 2 pi int_0^r_max Q^2 r dr
  double decay_rate = 0.0; // lambda in Q ~ C r^{-1/2} e^{-lambda r}
  double tail_coefficient = 0.0;  // Q = C K_0(r) beyond r_trust
  double r_trust = 0.0;           // last radius backed by the integrator
  /// Bisection brackets [q0_lo, q0_hi], outermost first.
  std::vector<std::pair<double, double>> brackets;

  double dr() const { return r_max / double(n_r - 1); }
  double radius(int j) const { return double(j) * dr(); }
  /// Cubic Hermite interpolation inside [0, r_max], K_0 tail beyond.
  double value(double r) const;
  double derivative(double r) const;
};

enum class ShotClass { undershoot, overshoot, undecided };

const char* to_string(ShotClass c);

struct Shot {
  ShotClass classification = ShotClass::undecided;
  double r_event = 0.0;  // radius where the classification fired (or r_max)
  std::vector<double> q, dq;  // samples up to and including r_event
};

/// RK4 integration of Q'' + Q'/r - Q + Q^3 = 0 from Q(0) = q0, Q'(0) = 0.
/// undershoot: Q' >= 0 at some r > 0 while Q > 0 (q0 below Q(0));
/// overshoot: Q < 0 (q0 above Q(0)).
Shot shoot(double q0, double r_max, int n_r);

/// Bisection on q0 in [0.1, 10] until the bracket width is < tol * q0.
TownesProfile solve_townes(double tol = 1e-10, double r_max = 20.0, int n_r = 40000);

struct TownesIdentities {
  double kinetic = 0, mass = 0, quartic = 0;  // 2 pi int (Q'^2, Q^2, Q^4) r dr
  double k_over_m = 0;      // |K/M - 1|
  double two_k_over_p = 0;  // |2K/P - 1|
  double two_m_over_p = 0;  // |2M/P - 1|
  double max_residual() const;
};

TownesIdentities townes_identities(const TownesProfile& p);

/// Profile r -> Q(k r) resampled on the same radial grid.
TownesProfile scaled_profile(const TownesProfile& p, double k);

/// (1/sqrt(a*)) Q(|x - center| / scale) on the grid, zero ring.
FieldD q_on_grid(const TownesProfile& p, const Grid& grid, const Point& center, double scale);

/// Fraction of int Q^2 lying beyond radius r.
double townes_mass_beyond(const TownesProfile& p, double r);

void save_profile(const std::string& path, const TownesProfile& p);
TownesProfile load_profile(const std::string& path);

/// solve_townes() with the defaults, computed once per process.
const TownesProfile& reference_townes();

/// Composite Simpson on uniform samples (trapezoid on a trailing odd panel).
double simpson(const std::vector<double>& f, double dx);

}  // namespace gpwells
