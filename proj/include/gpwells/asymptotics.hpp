#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpwells/solver.hpp"

namespace gpwells {

struct SweepRecord {
  double a = 0;
  double gap = 0;
  double e = 0;
  double kinetic = 0;
  double potential = 0;
  double quartic = 0;
  double mu = 0;
  double eps = 0;
  Point zbar{0, 0};
  double dist_to_boundary = 0;
  int winner = -1;
  double profile_h1_err = 0;      // eps mode
  double profile_h1_err_log = 0;  // log mode, NaN where the scale is unresolved
  double energy_ratio = 0;
  double eps_ratio = 0;
  double trial_energy = 0;  // NaN when not computed
  double residual = 0;
  int iters = 0;
  bool converged = false;
  bool zbar_tie = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::uint64_t spec_hash = 0;
  Grid grid;
  double a_star = 0;
  double townes_q0 = 0;
  /// Minimizers, kept when SweepOptions::keep_fields is set.
  std::vector<FieldD> fields;
};

struct SweepOptions {
  /// Start each solve from the previous minimizer; cold starts use cfg.init.
  bool warm_start = true;
  /// Worker threads for cold-start sweeps.
  int threads = 1;
  bool keep_fields = false;
  bool trial_bound = true;
};

/// Solve along a strictly increasing a_list (every a < a*).
SweepResult run_sweep(const PotentialSpec& spec, const Grid& grid, const std::vector<double>& a_list,
                      const SolverConfig& cfg, const TownesProfile& townes,
                      const SweepOptions& options = {});

/// Fills the derived record fields from a ground state.
SweepRecord make_record(const GroundState& gs, const PotentialSpec& spec,
                        const TownesProfile& townes);

enum class ProfileMode { eps, log };

/// H1 distance between s u(s y + z) and Q(|y|)/sqrt(a*), s = eps or
/// 2R/|ln(a* - a)|, z the sub-grid peak of u. R is needed for the log mode.
double rescaled_profile_error(const GroundState& gs, const TownesProfile& townes, ProfileMode mode,
                              double R = 0);

/// Peak of u refined by a parabola through the grid maximum and its neighbours.
Point refined_peak(const FieldD& u);

struct DerivativeEntry {
  double a_mid = 0;
  double lhs = 0;  // finite-difference e'(a)
  double rhs = 0;  // -quartic / 2
  double relerr = 0;
  bool one_sided = false;
};

/// Three-point differences at interior records, plus a one-sided entry
/// when the sweep starts at a = 0.
std::vector<DerivativeEntry> derivative_check(const SweepResult& result);

struct SymmetryReport {
  double angular_variance = 0;
  double radial_offset = 0;
  Point center{0, 0};
  double radius = 0;  // sampling circle
};

/// Requires a rotation center: radial override, a single annulus or a single disk.
SymmetryReport symmetry_diagnostics(const GroundState& gs, const PotentialSpec& spec);

/// Largest V(zbar) over records with a >= tail_fraction * a*.
double zero_set_attraction(const SweepResult& result, const PotentialSpec& spec,
                           double tail_fraction = 0.9);

/// Bilinear interpolation of a grid field, zero outside the box.
double bilinear(const FieldD& u, const Point& x);

std::string sweep_csv(const SweepResult& result);
void write_sweep_csv(const std::string& path, const SweepResult& result);
/// Records from CSV text (fields not in the table are left at defaults).
std::vector<SweepRecord> parse_sweep_csv(const std::string& text);
std::vector<SweepRecord> read_sweep_csv(const std::string& path);

extern const char* const kSweepCsvHeader;

}  // namespace gpwells
