#pragma once

#include <Eigen/SparseCore>
#include <Eigen/IterativeLinearSolvers>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gpwells/field.hpp"
#include "gpwells/potential.hpp"
#include "gpwells/townes.hpp"

namespace gpwells {

enum class Scheme { semi_implicit, explicit_euler };

const char* to_string(Scheme s);

struct GaussianInit {
  Point center{0, 0};
  double width = 1;
};
struct TownesInit {
  Point center{0, 0};
  double scale = 1;
};
struct FileInit {
  std::string path;
};
struct RandomInit {
  std::uint64_t seed = 1;
};
/// Warm start from an existing field on the same grid.
struct FieldInit {
  FieldD u;
};

using InitSpec = std::variant<GaussianInit, TownesInit, FileInit, RandomInit, FieldInit>;

struct SolverConfig {
  double dt = 0.1;
  double tol_residual = 1e-8;
  double tol_energy = 1e-10;
  int max_iters = 5000;
  InitSpec init = GaussianInit{};
  Scheme scheme = Scheme::semi_implicit;
  /// Switch to projected Newton-CG after the flow phase.
  bool newton = true;
  /// Flow steps taken before Newton; the flow hands over earlier once the
  /// residual drops below flow_handover.
  int flow_steps = 40;
  double flow_handover = 1e-2;
  /// Reject grids violating h <= R/16 and h <= eps_pred/6.
  bool check_resolution = true;
  /// Newton iterations without halving the best residual before giving up.
  int stall_iters = 30;
  /// Phase condition for rotation-invariant wells: Newton steps are kept
  /// orthogonal to the rotation generator about this center. A single
  /// annulus well supplies the center when lock_rotation is set.
  std::optional<Point> rotation_center;
  bool lock_rotation = true;
  /// Critical constant; 0 selects the cached reference profile.
  double a_star = 0;
  /// Optional progress hook: phase ("flow" or "newton"), iteration, energy,
  /// residual, inner CG iterations.
  std::function<void(const char*, int, double, double, int)> monitor;
};

struct GroundState {
  FieldD u;
  double a = 0;
  double e = 0;
  Energy breakdown;
  double mu = 0;
  double eps = 0;
  Point zbar{0, 0};
  int zbar_ix = 0, zbar_iy = 0;
  bool zbar_tie = false;
  int iters = 0;
  int flow_iters = 0;
  int newton_iters = 0;
  double residual = 0;
  bool converged = false;
  /// Energy after every accepted step, starting with the initial state.
  std::vector<double> history;
  std::vector<std::string> warnings;
};

struct CgResult {
  int iters = 0;
  bool converged = false;
  bool negative_curvature = false;
  double relative_residual = 0;
};

using LinearMap = std::function<void(const VectorX<double>&, VectorX<double>&)>;

/// Preconditioned CG for A x = b from the initial x. Stops at
/// ||r|| <= rtol ||b|| or on nonpositive curvature (Steihaug).
CgResult pcg(const LinearMap& A, const LinearMap& M, const VectorX<double>& b,
             VectorX<double>& x, double rtol, int max_iter);

/// Discrete GP operator pieces on the interior unknowns, cached per (grid, V).
class GpOperator {
 public:
  GpOperator(const Grid& grid, const FieldD& V);

  const Grid& grid() const { return grid_; }
  double cell() const { return h2_; }
  const VectorX<double>& potential() const { return v_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& laplacian() const { return A_; }

  /// h^2-weighted inner product and norm.
  double dot(const VectorX<double>& x, const VectorX<double>& y) const { return h2_ * x.dot(y); }
  double norm(const VectorX<double>& x) const { return std::sqrt(dot(x, x)); }

  struct Eval {
    double kinetic = 0, potential = 0, quartic = 0, energy = 0, mu = 0, residual = 0;
    VectorX<double> grad;  // A x + V x - a x^3
  };
  Eval evaluate(const VectorX<double>& x, double a) const;
  double energy(const VectorX<double>& x, double a) const;

  /// Factor A + V + shift (incomplete Cholesky); reused until the shift changes.
  void prepare_preconditioner(double shift);
  void apply_preconditioner(const VectorX<double>& r, VectorX<double>& z) const;
  double preconditioner_shift() const { return shift_; }

 private:
  Grid grid_;
  double h2_;
  VectorX<double> v_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A_;
  std::unique_ptr<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>> ic_;
  double shift_ = -1;
};

/// One normalized-gradient-flow step; dt is halved for this step until the
/// energy does not increase.
FieldD flow_step(const FieldD& u, const FieldD& V, double a, double dt,
                 Scheme scheme = Scheme::semi_implicit);

struct FlowStep {
  VectorX<double> x;
  double energy = 0;
  double dt_used = 0;
  int halvings = 0;
  int cg_iters = 0;
};
FlowStep flow_step(GpOperator& op, const VectorX<double>& x, double a, double dt, Scheme scheme);

GroundState solve_ground_state(const PotentialSpec& spec, const Grid& grid, double a,
                               const SolverConfig& cfg = {});
/// Same, with V precomputed on `grid` (sample_potential(spec, grid)).
GroundState solve_ground_state(const PotentialSpec& spec, const FieldD& V, double a,
                               const SolverConfig& cfg = {});

/// L2 norm over the interior of -Lap_h u + V u - mu u - a u^3.
double el_residual(const FieldD& u, const FieldD& V, double a, double mu);

/// 1/2 int(|grad u|^2 + (V - mu) u^2) - (a/4) int u^4.
double j_functional(const FieldD& u, const FieldD& V, double a, double mu);

struct TrialEnergy {
  double energy = 0;
  double A2 = 0;  // normalization factor squared
  double tau = 0;
  Point x0{0, 0};
  FieldD phi;
};

/// Cut-off Townes trial state at an incenter of a largest well.
TrialEnergy trial_energy(double a, const PotentialSpec& spec, const Grid& grid,
                         const TownesProfile& townes);
TrialEnergy trial_energy(double a, const PotentialSpec& spec, const FieldD& V,
                         const TownesProfile& townes);

/// Smooth cut-off: 1 on [0, 1], 0 on [2, inf).
double smooth_cutoff(double t);

struct Eigenpair {
  double lambda = 0;
  FieldD v;
  int iters = 0;
};

/// Smallest Dirichlet eigenpair of -Lap_h + V by inverse power iteration.
Eigenpair eigen_oracle(const FieldD& V, double tol = 1e-13, int max_iters = 2000);

/// Initial state for a config (clamped, zero ring, unit mass).
FieldD initial_state(const InitSpec& init, const PotentialSpec& spec, const Grid& grid);

/// Grid argmax of u, ties to the lexicographically smallest (iy, ix).
struct ArgMax {
  int ix = 0, iy = 0;
  bool tie = false;
  double value = 0;
};
ArgMax grid_argmax(const FieldD& u);

/// Predicted blow-up width 2R / |ln(a* - a)|.
double predicted_eps(double R, double gap);

/// Default box half-width: the wells (or the radial center) plus a margin of 6.
double auto_grid_L(const PotentialSpec& spec);

/// Smallest power of two n >= 64 with h <= R/16 and h <= eps_pred(a_max)/6;
/// 256 for radial potentials. ResolutionError past 8192.
int auto_grid_n(const PotentialSpec& spec, double L, double a_max, double a_star);

}  // namespace gpwells
