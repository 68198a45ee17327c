#include "gpwells/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace gpwells {

const char* const kSweepCsvHeader =
    "a,gap,e,kinetic,quartic,mu,eps,zbar_x,zbar_y,dist_to_boundary,winner,profile_h1_err,"
    "energy_ratio,eps_ratio";

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double bilinear(const FieldD& u, const Point& x) {
  const Grid& g = u.grid();
  const double h = g.h();
  const double fx = (x.x() + g.L) / h, fy = (x.y() + g.L) / h;
  if (!(fx >= 0 && fy >= 0 && fx <= g.n - 1 && fy <= g.n - 1)) return 0.0;
  const int ix = std::min(int(fx), g.n - 2), iy = std::min(int(fy), g.n - 2);
  const double tx = fx - ix, ty = fy - iy;
  const auto& v = u.values();
  return (1 - ty) * ((1 - tx) * v(iy, ix) + tx * v(iy, ix + 1)) +
         ty * ((1 - tx) * v(iy + 1, ix) + tx * v(iy + 1, ix + 1));
}

Point refined_peak(const FieldD& u) {
  const ArgMax m = grid_argmax(u);
  const Grid& g = u.grid();
  const auto& v = u.values();
  auto offset = [](double lo, double mid, double hi) {
    const double d = lo - 2 * mid + hi;
    if (!(d < 0)) return 0.0;
    return std::clamp(0.5 * (lo - hi) / d, -0.5, 0.5);
  };
  const double dx = offset(v(m.iy, m.ix - 1), v(m.iy, m.ix), v(m.iy, m.ix + 1));
  const double dy = offset(v(m.iy - 1, m.ix), v(m.iy, m.ix), v(m.iy + 1, m.ix));
  return g.point(m.ix, m.iy) + g.h() * Point(dx, dy);
}

double rescaled_profile_error(const GroundState& gs, const TownesProfile& townes, ProfileMode mode,
                              double R) {
  const Grid& g = gs.u.grid();
  double s = gs.eps;
  if (mode == ProfileMode::log) {
    if (!(R > 0)) throw ConfigurationError("log-mode profile error needs the inradius R");
    s = predicted_eps(R, townes.a_star - gs.a);
  }
  if (!(s > 0) || !std::isfinite(s)) throw ResolutionError("profile scale is not finite");
  const Point z = refined_peak(gs.u);
  const double reach = g.L - std::max(std::abs(z.x()), std::abs(z.y()));
  if (townes_mass_beyond(townes, reach / s) > 1e-2)
    throw ResolutionError("rescaled profile at scale " + std::to_string(s) + " exceeds the box");
  FieldD q = q_on_grid(townes, g, z, s);
  q.values() /= s;
  const FieldD d = gs.u - q;
  // Change of variables x = s y + z back to the native grid.
  return std::sqrt(mass(d) + s * s * kinetic(d));
}

SweepRecord make_record(const GroundState& gs, const PotentialSpec& spec,
                        const TownesProfile& townes) {
  SweepRecord r;
  r.a = gs.a;
  r.gap = townes.a_star - gs.a;
  r.e = gs.e;
  r.kinetic = gs.breakdown.kinetic;
  r.potential = gs.breakdown.potential;
  r.quartic = gs.breakdown.quartic;
  r.mu = gs.mu;
  r.eps = gs.eps;
  r.zbar = gs.zbar;
  r.residual = gs.residual;
  r.iters = gs.iters;
  r.converged = gs.converged;
  r.zbar_tie = gs.zbar_tie;
  double R = 0;
  if (!spec.wells.empty()) {
    R = largest_inradius(spec).R;
    r.winner = nearest_well(spec, gs.zbar);
    r.dist_to_boundary = std::abs(signed_distance(spec.wells[r.winner], gs.zbar));
    const double lg = std::abs(std::log(r.gap));
    r.energy_ratio = r.e * 4 * R * R * townes.a_star / (r.gap * lg * lg);
    r.eps_ratio = r.eps * lg / (2 * R);
  } else {
    r.dist_to_boundary = r.energy_ratio = r.eps_ratio = kNaN;
  }
  try {
    r.profile_h1_err = rescaled_profile_error(gs, townes, ProfileMode::eps);
  } catch (const ResolutionError&) {
    r.profile_h1_err = kNaN;
  }
  r.profile_h1_err_log = kNaN;
  r.trial_energy = kNaN;
  if (R > 0) {
    try {
      r.profile_h1_err_log = rescaled_profile_error(gs, townes, ProfileMode::log, R);
    } catch (const ResolutionError&) {
    }
  }
  return r;
}

SweepResult run_sweep(const PotentialSpec& spec, const Grid& grid, const std::vector<double>& a_list,
                      const SolverConfig& cfg, const TownesProfile& townes,
                      const SweepOptions& options) {
  if (a_list.empty()) throw ConfigurationError("sweep needs at least one a");
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    if (!(a_list[i] >= 0 && a_list[i] < townes.a_star))
      throw ConfigurationError("sweep values must lie in [0, a*)");
    if (i > 0 && !(a_list[i] > a_list[i - 1]))
      throw ConfigurationError("sweep a_list must be strictly increasing");
  }
  SolverConfig base = cfg;
  base.a_star = townes.a_star;
  const FieldD V = sample_potential(spec, grid);
  SweepResult out;
  out.spec_hash = potential_hash(spec);
  out.grid = grid;
  out.a_star = townes.a_star;
  out.townes_q0 = townes.q0;
  const std::size_t n = a_list.size();
  out.records.resize(n);
  std::vector<FieldD> fields(n);

  auto finish = [&](std::size_t i, const GroundState& gs) {
    SweepRecord r = make_record(gs, spec, townes);
    if (options.trial_bound && !spec.wells.empty() && a_list[i] > 0) {
      try {
        r.trial_energy = trial_energy(a_list[i], spec, V, townes).energy;
      } catch (const ResolutionError&) {
      } catch (const DomainError&) {
      }
    }
    out.records[i] = r;
  };

  if (options.warm_start) {
    SolverConfig c = base;
    for (std::size_t i = 0; i < n; ++i) {
      GroundState gs = solve_ground_state(spec, V, a_list[i], c);
      finish(i, gs);
      c.init = FieldInit{gs.u};
      fields[i] = std::move(gs.u);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          GroundState gs = solve_ground_state(spec, V, a_list[i], base);
          finish(i, gs);
          fields[i] = std::move(gs.u);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int threads = std::max(1, std::min<int>(options.threads, int(n)));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  if (options.keep_fields) out.fields = std::move(fields);
  return out;
}

std::vector<DerivativeEntry> derivative_check(const SweepResult& result) {
  std::vector<const SweepRecord*> rec;
  for (const auto& r : result.records)
    if (r.converged) rec.push_back(&r);
  std::vector<DerivativeEntry> out;
  if (rec.size() < 3) return out;
  auto entry = [](double a, double lhs, double quartic, bool one_sided) {
    DerivativeEntry d;
    d.a_mid = a;
    d.lhs = lhs;
    d.rhs = -0.5 * quartic;
    d.relerr = std::abs(d.lhs - d.rhs) / std::abs(d.rhs);
    d.one_sided = one_sided;
    return d;
  };
  if (rec[0]->a == 0) {
    const double h1 = rec[1]->a - rec[0]->a, h2 = rec[2]->a - rec[1]->a;
    const double lhs = -(2 * h1 + h2) / (h1 * (h1 + h2)) * rec[0]->e +
                       (h1 + h2) / (h1 * h2) * rec[1]->e - h1 / (h2 * (h1 + h2)) * rec[2]->e;
    out.push_back(entry(0.0, lhs, rec[0]->quartic, true));
  }
  for (std::size_t i = 1; i + 1 < rec.size(); ++i) {
    const double h1 = rec[i]->a - rec[i - 1]->a, h2 = rec[i + 1]->a - rec[i]->a;
    const double lhs = -h2 / (h1 * (h1 + h2)) * rec[i - 1]->e + (h2 - h1) / (h1 * h2) * rec[i]->e +
                       h1 / (h2 * (h1 + h2)) * rec[i + 1]->e;
    out.push_back(entry(rec[i]->a, lhs, rec[i]->quartic, false));
  }
  return out;
}

SymmetryReport symmetry_diagnostics(const GroundState& gs, const PotentialSpec& spec) {
  SymmetryReport rep;
  double expected = 0;
  if (spec.radial) {
    rep.center = spec.radial->center;
  } else if (spec.wells.size() == 1 && std::holds_alternative<Annulus>(spec.wells[0])) {
    const auto& an = std::get<Annulus>(spec.wells[0]);
    rep.center = an.center;
    expected = 0.5 * (an.r1 + an.r2);
  } else if (spec.wells.size() == 1 && std::holds_alternative<Disk>(spec.wells[0])) {
    rep.center = std::get<Disk>(spec.wells[0]).center;
  } else {
    throw NotApplicableError("potential has no rotation center");
  }
  const Grid& g = gs.u.grid();
  const double h = g.h();
  const double rho = (gs.zbar - rep.center).norm();
  rep.radial_offset = std::abs(rho - expected);
  rep.radius = rho;
  if (rho < 2 * h) {
    // Peak at the center: sample where u falls to half its maximum along +x.
    const double top = bilinear(gs.u, rep.center);
    double prev_r = 0, prev_v = top;
    rep.radius = 0;
    for (double r = 0.25 * h; r < g.L; r += 0.25 * h) {
      const double val = bilinear(gs.u, rep.center + Point(r, 0));
      if (val <= 0.5 * top) {
        rep.radius = prev_r + (prev_v - 0.5 * top) / (prev_v - val) * (r - prev_r);
        break;
      }
      prev_r = r;
      prev_v = val;
    }
    if (rep.radius == 0) throw NotApplicableError("no half-maximum radius inside the box");
  }
  const int K = 720;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < K; ++k) {
    const double t = 2 * std::numbers::pi * k / K;
    const double val = bilinear(gs.u, rep.center + rep.radius * Point(std::cos(t), std::sin(t)));
    sum += val;
    sum2 += val * val;
  }
  const double mean = sum / K;
  const double var = std::max(0.0, sum2 / K - mean * mean);
  rep.angular_variance = mean != 0 ? var / (mean * mean) : 0.0;
  return rep;
}

double zero_set_attraction(const SweepResult& result, const PotentialSpec& spec,
                           double tail_fraction) {
  if (result.records.empty()) throw ConfigurationError("zero_set_attraction needs a record");
  double worst = 0;
  bool any = false;
  for (const auto& r : result.records) {
    if (r.a < tail_fraction * result.a_star) continue;
    worst = std::max(worst, evaluate(spec, r.zbar));
    any = true;
  }
  return any ? worst : kNaN;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  char buf[64];
  auto num = [&](double x, bool last = false) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
    out += last ? '\n' : ',';
  };
  for (const auto& r : result.records) {
    num(r.a);
    num(r.gap);
    num(r.e);
    num(r.kinetic);
    num(r.quartic);
    num(r.mu);
    num(r.eps);
    num(r.zbar.x());
    num(r.zbar.y());
    num(r.dist_to_boundary);
    out += std::to_string(r.winner);
    out += ',';
    num(r.profile_h1_err);
    num(r.energy_ratio);
    num(r.eps_ratio, true);
  }
  return out;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << sweep_csv(result);
  if (!f) throw FormatError("short write to " + path);
}

std::vector<SweepRecord> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) throw FormatError("unexpected sweep CSV header");
  std::vector<SweepRecord> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 14) throw FormatError("sweep CSV row " + std::to_string(row) + " has wrong width");
    std::vector<double> x(14);
    for (int i = 0; i < 14; ++i) {
      char* end = nullptr;
      x[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw FormatError("sweep CSV row " + std::to_string(row) + ": bad number '" + cells[i] + "'");
    }
    SweepRecord r;
    r.a = x[0];
    r.gap = x[1];
    r.e = x[2];
    r.kinetic = x[3];
    r.quartic = x[4];
    r.mu = x[5];
    r.eps = x[6];
    r.zbar = Point(x[7], x[8]);
    r.dist_to_boundary = x[9];
    r.winner = int(x[10]);
    r.profile_h1_err = x[11];
    r.energy_ratio = x[12];
    r.eps_ratio = x[13];
    r.converged = true;
    out.push_back(r);
  }
  return out;
}

std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_sweep_csv(ss.str());
}

}  // namespace gpwells
