#include "gpwells/solver.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gpwells/field_io.hpp"

namespace gpwells {
namespace {

using Vec = VectorX<double>;

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& s) { return double(splitmix64(s) >> 11) * 0x1.0p-53; }

void normalize(const GpOperator& op, Vec& x) {
  const double m = op.dot(x, x);
  if (!(m > 0)) throw NumericError("state collapsed to zero");
  x /= std::sqrt(m);
}

void project_nonnegative(Vec& x) { x = x.cwiseMax(0.0); }

/// (x - c) d/dy u - (y - c) d/dx u by central differences on the interior.
Vec rotation_generator(const Grid& g, const Vec& u, const Point& c) {
  const int m = g.n - 2;
  const double h = g.h();
  Vec t(u.size());
  auto at = [&](int iy, int ix) {
    return (iy < 0 || ix < 0 || iy >= m || ix >= m) ? 0.0 : u(Eigen::Index(iy) * m + ix);
  };
  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix) {
      const Point p = g.point(ix + 1, iy + 1) - c;
      const double dx = (at(iy, ix + 1) - at(iy, ix - 1)) / (2 * h);
      const double dy = (at(iy + 1, ix) - at(iy - 1, ix)) / (2 * h);
      t(Eigen::Index(iy) * m + ix) = p.x() * dy - p.y() * dx;
    }
  return t;
}

}  // namespace

const char* to_string(Scheme s) {
  return s == Scheme::semi_implicit ? "semi_implicit" : "explicit";
}

double predicted_eps(double R, double gap) {
  const double l = std::abs(std::log(gap));
  return l == 0 ? std::numeric_limits<double>::infinity() : 2.0 * R / l;
}

double auto_grid_L(const PotentialSpec& spec) { return bounding_radius(spec) + 6.0; }

int auto_grid_n(const PotentialSpec& spec, double L, double a_max, double a_star) {
  if (spec.radial) return 256;
  const double R = largest_inradius(spec).R;
  double h_max = R / 16;
  if (a_max > 0) h_max = std::min(h_max, predicted_eps(R, a_star - a_max) / 6);
  for (int n = 64; n <= 8192; n *= 2)
    if (2 * L / (n - 1) <= h_max) return n;
  throw ResolutionError("no grid up to n = 8192 resolves h <= " + std::to_string(h_max));
}

CgResult pcg(const LinearMap& A, const LinearMap& M, const Vec& b, Vec& x, double rtol,
             int max_iter) {
  CgResult res;
  const double bnorm = b.norm();
  if (bnorm == 0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  Vec r(b.size()), z(b.size()), p(b.size()), Ap(b.size());
  A(x, Ap);
  r = b - Ap;
  double rn = r.norm();
  if (rn <= rtol * bnorm) {
    res.converged = true;
    res.relative_residual = rn / bnorm;
    return res;
  }
  M(r, z);
  p = z;
  double rz = r.dot(z);
  for (int k = 0; k < max_iter; ++k) {
    A(p, Ap);
    const double curv = p.dot(Ap);
    if (!(curv > 0)) {
      res.negative_curvature = true;
      res.iters = k;
      res.relative_residual = rn / bnorm;
      return res;
    }
    const double alpha = rz / curv;
    x += alpha * p;
    r -= alpha * Ap;
    rn = r.norm();
    res.iters = k + 1;
    if (rn <= rtol * bnorm) {
      res.converged = true;
      break;
    }
    M(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.relative_residual = rn / bnorm;
  return res;
}

GpOperator::GpOperator(const Grid& grid, const FieldD& V) : grid_(grid) {
  if (V.grid() != grid) throw GridMismatchError("potential sampled on a different grid");
  if (!V.all_finite()) throw NumericError("potential has non-finite values");
  h2_ = grid.h() * grid.h();
  v_ = V.interior();
  A_ = assemble_operator<double, Eigen::RowMajor>(grid);
}

GpOperator::Eval GpOperator::evaluate(const Vec& x, double a) const {
  Eval e;
  Vec Ax = A_ * x;
  const Vec x2 = x.cwiseProduct(x);
  e.kinetic = h2_ * x.dot(Ax);
  e.potential = h2_ * v_.dot(x2);
  e.quartic = h2_ * x2.squaredNorm();
  e.energy = e.kinetic + e.potential - 0.5 * a * e.quartic;
  const double m = h2_ * x.squaredNorm();
  e.mu = (e.kinetic + e.potential - a * e.quartic) / m;
  e.grad = std::move(Ax);
  e.grad += v_.cwiseProduct(x) - a * x2.cwiseProduct(x);
  e.residual = norm(e.grad - e.mu * x);
  return e;
}

double GpOperator::energy(const Vec& x, double a) const {
  const Vec x2 = x.cwiseProduct(x);
  return h2_ * (x.dot(A_ * x) + v_.dot(x2) - 0.5 * a * x2.squaredNorm());
}

void GpOperator::prepare_preconditioner(double shift) {
  if (ic_ && shift == shift_) return;
  Vec d = v_.array() + shift;
  Eigen::SparseMatrix<double> M = assemble_operator<double, Eigen::ColMajor>(grid_, &d);
  ic_ = std::make_unique<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>>();
  ic_->compute(M);
  if (ic_->info() != Eigen::Success) throw SolverError("incomplete Cholesky factorization failed");
  shift_ = shift;
}

void GpOperator::apply_preconditioner(const Vec& r, Vec& z) const {
  if (!ic_) throw SolverError("preconditioner not prepared");
  z = ic_->solve(r);
}

FlowStep flow_step(GpOperator& op, const Vec& x, double a, double dt, Scheme scheme) {
  if (!(dt > 0)) throw ConfigurationError("flow_step: dt must be positive");
  const auto ev = op.evaluate(x, a);
  const double E0 = ev.energy;
  // Constant shift keeps the lagged operator positive near a*; it does not
  // move the fixed points.
  const double s = std::min(0.0, ev.mu);
  const Vec x2 = x.cwiseProduct(x);
  const auto& A = op.laplacian();
  const auto& v = op.potential();
  FlowStep out;
  out.x = x;
  out.energy = E0;
  for (int halving = 0; halving < 60; ++halving, dt *= 0.5) {
    Vec w;
    if (scheme == Scheme::semi_implicit) {
      const double inv_dt = 1.0 / dt;
      const double pshift = inv_dt - s;
      const double cur = op.preconditioner_shift();
      if (cur <= 0 || pshift > 2 * cur || pshift < 0.5 * cur) op.prepare_preconditioner(pshift);
      const Vec diag = v - a * x2 + Vec::Constant(x.size(), inv_dt - s);
      LinearMap Aop = [&](const Vec& q, Vec& y) { y = A * q + diag.cwiseProduct(q); };
      LinearMap Mop = [&](const Vec& r, Vec& z) { op.apply_preconditioner(r, z); };
      w = x;
      const Vec b = inv_dt * x;
      const CgResult cg = pcg(Aop, Mop, b, w, 1e-11, 4000);
      out.cg_iters += cg.iters;
      if (cg.negative_curvature) {
        out.halvings = halving + 1;
        continue;
      }
      if (!cg.converged)
        throw SolverError("flow_step: inner CG did not converge (relative residual " +
                          std::to_string(cg.relative_residual) + ")");
    } else {
      w = x - dt * (ev.grad - ev.mu * x);
    }
    project_nonnegative(w);
    const double m = op.dot(w, w);
    if (!(m > 0) || !w.allFinite()) {
      out.halvings = halving + 1;
      continue;
    }
    w /= std::sqrt(m);
    const double E1 = op.energy(w, a);
    if (E1 <= E0 + 1e-14 * std::max(1.0, std::abs(E0))) {
      out.x = std::move(w);
      out.energy = E1;
      out.dt_used = dt;
      out.halvings = halving;
      return out;
    }
    out.halvings = halving + 1;
  }
  out.dt_used = 0;
  return out;
}

FieldD flow_step(const FieldD& u, const FieldD& V, double a, double dt, Scheme scheme) {
  require_same_grid(u, V);
  GpOperator op(u.grid(), V);
  Vec x = u.interior();
  normalize(op, x);
  return FieldD::from_interior(u.grid(), flow_step(op, x, a, dt, scheme).x);
}

ArgMax grid_argmax(const FieldD& u) {
  ArgMax m;
  m.value = -std::numeric_limits<double>::infinity();
  const int n = u.grid().n;
  const auto& v = u.values();
  for (int iy = 1; iy < n - 1; ++iy)
    for (int ix = 1; ix < n - 1; ++ix) {
      const double x = v(iy, ix);
      if (x > m.value) {
        m.value = x;
        m.ix = ix;
        m.iy = iy;
        m.tie = false;
      } else if (x == m.value) {
        m.tie = true;
      }
    }
  return m;
}

FieldD initial_state(const InitSpec& init, const PotentialSpec& spec, const Grid& grid) {
  FieldD u(grid);
  auto& v = u.values();
  const int n = grid.n;
  if (const auto* g = std::get_if<GaussianInit>(&init)) {
    if (!(g->width > 0)) throw ConfigurationError("gaussian init needs a positive width");
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        v(iy, ix) = std::exp(-(grid.point(ix, iy) - g->center).squaredNorm() /
                             (2 * g->width * g->width));
  } else if (const auto* t = std::get_if<TownesInit>(&init)) {
    u = q_on_grid(reference_townes(), grid, t->center, t->scale);
  } else if (const auto* f = std::get_if<FileInit>(&init)) {
    u = load_field(f->path, grid.stencil);
    if (u.grid() != grid) throw GridMismatchError("init field " + f->path + " lives on another grid");
  } else if (const auto* w = std::get_if<FieldInit>(&init)) {
    if (w->u.grid() != grid) throw GridMismatchError("warm-start field lives on another grid");
    u = w->u;
  } else {
    const auto& r = std::get<RandomInit>(init);
    std::uint64_t state = r.seed;
    const double reach = spec.radial ? 2.0 : bounding_radius(spec) + 0.5;
    double width = 0.5;
    if (!spec.radial) width = 0.5 * largest_inradius(spec).R;
    for (int k = 0; k < 6; ++k) {
      const Point c(reach * (2 * uniform01(state) - 1), reach * (2 * uniform01(state) - 1));
      const double s = width * (0.5 + uniform01(state));
      const double amp = 0.2 + uniform01(state);
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          v(iy, ix) += amp * std::exp(-(grid.point(ix, iy) - c).squaredNorm() / (2 * s * s));
    }
  }
  if (!u.all_finite()) throw NumericError("initial state has non-finite values");
  v = v.cwiseMax(0.0);
  u.zero_boundary();
  const double m = mass(u);
  if (!(m > 0)) throw ConfigurationError("initial state vanishes on the grid");
  v /= std::sqrt(m);
  return u;
}

GroundState solve_ground_state(const PotentialSpec& spec, const Grid& grid, double a,
                               const SolverConfig& cfg) {
  return solve_ground_state(spec, sample_potential(spec, grid), a, cfg);
}

GroundState solve_ground_state(const PotentialSpec& spec, const FieldD& V, double a,
                               const SolverConfig& cfg) {
  const Grid& grid = V.grid();
  if (!(cfg.dt > 0) || !(cfg.tol_residual > 0) || !(cfg.tol_energy > 0) || cfg.max_iters < 1)
    throw ConfigurationError("solver config needs dt > 0, tolerances > 0, max_iters >= 1");
  const double a_star = cfg.a_star > 0 ? cfg.a_star : reference_townes().a_star;
  if (!(a >= 0 && a < a_star))
    throw ConfigurationError("interaction strength must satisfy 0 <= a < a*");
  if (cfg.check_resolution && !spec.radial) {
    const double R = largest_inradius(spec).R;
    const double h = grid.h();
    if (h > R / 16)
      throw ResolutionError("grid spacing " + std::to_string(h) + " exceeds R/16");
    if (a > 0 && h > predicted_eps(R, a_star - a) / 6)
      throw ResolutionError("grid spacing " + std::to_string(h) + " exceeds eps_pred/6 = " +
                            std::to_string(predicted_eps(R, a_star - a) / 6));
  }

  GpOperator op(grid, V);
  GroundState gs;
  gs.a = a;
  Vec x = initial_state(cfg.init, spec, grid).interior();
  normalize(op, x);
  double E = op.energy(x, a);
  gs.history.push_back(E);
  double last_dE = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  bool done = false;

  auto take_flow_step = [&](double dt) {
    const FlowStep st = flow_step(op, x, a, dt, cfg.scheme);
    last_dE = E - st.energy;
    x = st.x;
    E = st.energy;
    gs.history.push_back(E);
    ++gs.iters;
    ++gs.flow_iters;
    return st;
  };

  const int flow_budget = cfg.newton ? std::min(cfg.flow_steps, cfg.max_iters) : cfg.max_iters;
  while (gs.iters < flow_budget) {
    const FlowStep st = take_flow_step(cfg.dt);
    residual = op.evaluate(x, a).residual;
    if (cfg.monitor) cfg.monitor("flow", gs.iters, E, residual, st.cg_iters);
    if (residual <= cfg.tol_residual && std::abs(last_dE) <= cfg.tol_energy) {
      done = true;
      break;
    }
    if (cfg.newton && residual < cfg.flow_handover) break;
  }

  if (cfg.newton && !done) {
    const auto& A = op.laplacian();
    const auto& v = op.potential();
    std::optional<Point> center = cfg.rotation_center;
    if (!center && cfg.lock_rotation && spec.wells.size() == 1 &&
        std::holds_alternative<Annulus>(spec.wells[0]))
      center = std::get<Annulus>(spec.wells[0]).center;
    double best = std::numeric_limits<double>::infinity();
    int best_at = gs.iters;
    while (gs.iters < cfg.max_iters) {
      const auto ev = op.evaluate(x, a);
      residual = ev.residual;
      if (residual <= cfg.tol_residual && std::abs(last_dE) <= cfg.tol_energy) {
        done = true;
        break;
      }
      if (residual < 0.5 * best) {
        best = residual;
        best_at = gs.iters;
      } else if (gs.iters - best_at > cfg.stall_iters) {
        gs.warnings.push_back("Newton stalled at residual " + std::to_string(residual));
        break;
      }
      const Vec r = ev.grad - ev.mu * x;
      const double want = std::max(0.0, -ev.mu) + 1.0;
      const double cur = op.preconditioner_shift();
      if (cur <= 0 || std::abs(want - cur) > 0.25 * cur) op.prepare_preconditioner(want);
      // Directions held fixed by the step: the mass constraint and, for a
      // rotation-invariant well, the rotation generator (phase condition).
      std::vector<Vec> C{x / x.norm()};
      if (center) {
        Vec tau = rotation_generator(grid, x, *center);
        tau -= C[0].dot(tau) * C[0];
        if (op.norm(tau) > 1e-2) C.push_back(tau / tau.norm());
      }
      const int k = int(C.size());
      Eigen::MatrixXd Y(x.size(), k);
      for (int j = 0; j < k; ++j) {
        Vec yj;
        op.apply_preconditioner(C[j], yj);
        Y.col(j) = yj;
      }
      Eigen::MatrixXd G(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) G(i, j) = C[i].dot(Y.col(j));
      const Eigen::MatrixXd Ginv = G.inverse();
      auto project = [&](Vec& q) {
        for (const auto& c : C) q -= c.dot(q) * c;
      };
      const Vec diag = v - 3.0 * a * x.cwiseProduct(x) - Vec::Constant(x.size(), ev.mu);
      LinearMap Hop = [&](const Vec& q, Vec& out) {
        out = A * q + diag.cwiseProduct(q);
        project(out);
      };
      LinearMap Mop = [&](const Vec& q, Vec& z) {
        op.apply_preconditioner(q, z);
        Eigen::VectorXd cz(k);
        for (int j = 0; j < k; ++j) cz(j) = C[j].dot(z);
        z -= Y * (Ginv * cz);
      };
      Vec p = Vec::Zero(x.size());
      Vec b = -r;
      project(b);
      const CgResult cg = pcg(Hop, Mop, b, p, std::min(0.1, residual), 500);
      if (cfg.monitor) cfg.monitor("newton", gs.iters, E, residual, cg.iters);
      double slope = 2.0 * op.dot(r, p);
      if (!(slope < 0) || p.squaredNorm() == 0) {
        Mop(b, p);
        slope = 2.0 * op.dot(r, p);
      }
      bool accepted = false;
      double t = 1.0;
      for (int it = 0; it < 40 && !accepted; ++it, t *= 0.5) {
        Vec xt = x + t * p;
        project_nonnegative(xt);
        const double m = op.dot(xt, xt);
        if (!(m > 0)) continue;
        xt /= std::sqrt(m);
        const double Et = op.energy(xt, a);
        bool ok = Et <= E + 1e-4 * t * slope;
        // Below round-off in E, fall back to residual decrease.
        if (!ok && std::abs(Et - E) <= 1e-13 * std::max(1.0, std::abs(E)))
          ok = op.evaluate(xt, a).residual < residual;
        if (ok) {
          last_dE = E - Et;
          x = std::move(xt);
          E = Et;
          accepted = true;
        }
      }
      ++gs.iters;
      if (accepted) {
        ++gs.newton_iters;
        gs.history.push_back(E);
        continue;
      }
      // Newton made no progress: fall back to a flow step.
      const FlowStep st = take_flow_step(cfg.dt);
      --gs.iters;  // take_flow_step counted it already
      if (st.dt_used == 0) {
        gs.warnings.push_back("no descent direction found at residual " + std::to_string(residual));
        break;
      }
    }
  }

  gs.u = FieldD::from_interior(grid, x);
  gs.breakdown = energy(gs.u, V, a);
  gs.e = gs.breakdown.total;
  gs.mu = gs.breakdown.kinetic + gs.breakdown.potential - a * gs.breakdown.quartic;
  gs.eps = 1.0 / std::sqrt(gs.breakdown.kinetic);
  const ArgMax am = grid_argmax(gs.u);
  gs.zbar_ix = am.ix;
  gs.zbar_iy = am.iy;
  gs.zbar = grid.point(am.ix, am.iy);
  gs.zbar_tie = am.tie;
  if (am.tie) gs.warnings.push_back("maximum is not unique on the grid; lexicographically smallest index kept");
  gs.residual = el_residual(gs.u, V, a, gs.mu);
  gs.converged = done;
  if (!done) gs.warnings.push_back("not converged after " + std::to_string(gs.iters) + " iterations");
  return gs;
}

double el_residual(const FieldD& u, const FieldD& V, double a, double mu) {
  require_same_grid(u, V);
  const auto& uv = u.values();
  FieldArray<double> r = neg_laplacian(u).values() + V.values() * uv - mu * uv - a * uv.cube();
  const int n = u.grid().n;
  const double h = u.grid().h();
  return h * std::sqrt(r.block(1, 1, n - 2, n - 2).square().sum());
}

double j_functional(const FieldD& u, const FieldD& V, double a, double mu) {
  require_same_grid(u, V);
  return 0.5 * (kinetic(u) + potential_energy(u, V) - mu * mass(u)) - 0.25 * a * quartic(u);
}

double smooth_cutoff(double t) {
  auto f = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
  if (t <= 1) return 1.0;
  if (t >= 2) return 0.0;
  const double p = f(2 - t), q = f(t - 1);
  return p / (p + q);
}

TrialEnergy trial_energy(double a, const PotentialSpec& spec, const Grid& grid,
                         const TownesProfile& townes) {
  return trial_energy(a, spec, sample_potential(spec, grid), townes);
}

TrialEnergy trial_energy(double a, const PotentialSpec& spec, const FieldD& V,
                         const TownesProfile& townes) {
  const Grid& grid = V.grid();
  const double a_star = townes.a_star;
  if (!(a < a_star)) throw ConfigurationError("trial_energy needs a < a*");
  if (spec.wells.empty()) throw ConfigurationError("trial_energy needs a well potential");
  const auto li = largest_inradius(spec);
  const double R = li.R;
  TrialEnergy t;
  t.x0 = li.wells[li.winners.front()].incenters.front();
  t.tau = std::abs(std::log(a_star - a)) / (2 * R);
  if (t.tau == 0) throw DomainError("trial state degenerate at a* - a = 1");
  if (!(1.0 / t.tau > 2 * grid.h()))
    throw ResolutionError("trial width 1/tau = " + std::to_string(1 / t.tau) +
                          " is not resolved by the grid");
  FieldD phi(grid);
  auto& v = phi.values();
  const double amp = t.tau / std::sqrt(a_star);
  for (int iy = 1; iy < grid.n - 1; ++iy)
    for (int ix = 1; ix < grid.n - 1; ++ix) {
      const double d = (grid.point(ix, iy) - t.x0).norm();
      const double c = smooth_cutoff(d / R);
      if (c > 0) v(iy, ix) = amp * c * townes.value(t.tau * d);
    }
  const double m = mass(phi);
  if (!(m > 0)) throw NumericError("trial state vanishes on the grid");
  t.A2 = 1.0 / m;
  v *= std::sqrt(t.A2);
  t.energy = energy(phi, V, a).total;
  t.phi = std::move(phi);
  return t;
}

Eigenpair eigen_oracle(const FieldD& V, double tol, int max_iters) {
  const Grid& grid = V.grid();
  GpOperator op(grid, V);
  op.prepare_preconditioner(0.0);
  const auto& A = op.laplacian();
  const auto& v = op.potential();
  LinearMap Aop = [&](const Vec& q, Vec& y) { y = A * q + v.cwiseProduct(q); };
  LinearMap Mop = [&](const Vec& r, Vec& z) { op.apply_preconditioner(r, z); };
  Vec x = Vec::Ones(grid.interior_size());
  normalize(op, x);
  Vec Ax;
  Aop(x, Ax);
  double lambda = x.dot(Ax) / x.squaredNorm();
  double best_res = std::numeric_limits<double>::infinity();
  int best_at = 0;
  Eigenpair out;
  for (int k = 1; k <= max_iters; ++k) {
    Vec y = x / lambda;
    const CgResult cg = pcg(Aop, Mop, x, y, 1e-13, 5000);
    if (!cg.converged) throw SolverError("eigen_oracle: inner solve failed");
    normalize(op, y);
    if (y.sum() < 0) y = -y;
    x = std::move(y);
    Aop(x, Ax);
    lambda = x.dot(Ax) / x.squaredNorm();
    const double res = op.norm(Ax - lambda * x);
    out.iters = k;
    if (res <= std::sqrt(tol) * std::abs(lambda)) {
      project_nonnegative(x);
      normalize(op, x);
      Aop(x, Ax);
      out.lambda = x.dot(Ax) / x.squaredNorm();
      out.v = FieldD::from_interior(grid, x);
      return out;
    }
    if (res < 0.5 * best_res) {
      best_res = res;
      best_at = k;
    } else if (k - best_at > 200) {
      throw SolverError("eigen_oracle: inverse iteration stagnated at residual " + std::to_string(res));
    }
  }
  throw SolverError("eigen_oracle: no convergence in " + std::to_string(max_iters) + " iterations");
}

}  // namespace gpwells
