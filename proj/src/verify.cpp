#include "gpwells/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "gpwells/asymptotics.hpp"
#include "gpwells/field_io.hpp"
#include "gpwells/plot.hpp"

namespace gpwells {
namespace {

namespace fs = std::filesystem;

const char* const kNames[] = {"",
                              "critical constant",
                              "Gagliardo-Nirenberg bound",
                              "linear limit",
                              "derivative law",
                              "energy asymptotics",
                              "blow-up rate",
                              "concentration location",
                              "profile convergence",
                              "symmetry",
                              "determinism and persistence"};

const double kGaps[] = {0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Collects named sub-checks; the criterion passes when all of them do.
struct Report {
  bool pass = true;
  std::vector<std::string> parts;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    parts.push_back(what + (ok ? "" : " [fail]"));
  }
  void note(const std::string& what) { parts.push_back(what); }
  std::string detail() const {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : "; ") + p;
    return s;
  }
};

std::vector<double> default_a_list(double a_star) {
  std::vector<double> a;
  for (double g : kGaps) a.push_back(a_star * (1 - g));
  return a;
}

SolverConfig sweep_config() {
  SolverConfig c;
  c.flow_steps = 10;
  return c;
}

PotentialSpec single_disk() { return make_potential({Disk{Point(0, 0), 1.0}}); }
PotentialSpec two_disks() { return make_potential({Disk{Point(-3, 0), 1.0}, Disk{Point(3, 0), 0.6}}); }
PotentialSpec annulus() { return make_potential({Annulus{Point(0, 0), 1.0, 2.0}}); }
PotentialSpec harmonic() {
  PotentialSpec s;
  s.radial = RadialProfile{Point(0, 0), 1.0, 2.0};
  return s;
}

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::string list(const std::vector<double>& v, const char* f = "%.4g") {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(f, v[i]);
  return s + "]";
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& o) : opt_(o), townes_(reference_townes()) {}

  Report run(int id) {
    switch (id) {
      case 1: return critical_constant();
      case 2: return gn_bound();
      case 3: return linear_limit();
      case 4: return derivative_law();
      case 5: return energy_asymptotics();
      case 6: return blowup_rate();
      case 7: return concentration();
      case 8: return profile_convergence();
      case 9: return symmetry();
      case 10: return determinism();
    }
    throw ConfigurationError("no criterion " + std::to_string(id));
  }

 private:
  const VerifyOptions& opt_;
  const TownesProfile& townes_;
  std::map<std::string, SweepResult> sweeps_;

  void log(const std::string& s) const {
    if (opt_.log) opt_.log(s);
  }

  const SweepResult& sweep(const std::string& key, const PotentialSpec& spec, double L) {
    auto it = sweeps_.find(key);
    if (it != sweeps_.end()) return it->second;
    log("sweep " + key + ": n = " + std::to_string(opt_.n) + ", L = " + fmt("%g", L));
    const Grid grid(opt_.n, L);
    SweepOptions so;
    so.keep_fields = true;
    const SweepResult r = run_sweep(spec, grid, default_a_list(townes_.a_star), sweep_config(), townes_, so);
    for (const auto& rec : r.records)
      log("  a/a* = " + fmt("%.4f", rec.a / townes_.a_star) + "  e = " + fmt("%.10g", rec.e) +
          "  energy_ratio = " + fmt("%.4f", rec.energy_ratio) + "  eps_ratio = " +
          fmt("%.4f", rec.eps_ratio) + "  residual = " + fmt("%.2e", rec.residual));
    if (!opt_.out_dir.empty()) {
      const fs::path d = fs::path(opt_.out_dir) / key;
      fs::create_directories(d);
      write_sweep_csv((d / "sweep.csv").string(), r);
      write_sweep_plots(d.string(), spec, r.records);
    }
    return sweeps_.emplace(key, r).first->second;
  }

  const SweepResult& disk_sweep() { return sweep("single_disk", single_disk(), 7.0); }

  Report critical_constant() {
    Report rep;
    const TownesProfile p = solve_townes(1e-10);
    const TownesProfile half = solve_townes(1e-10, p.r_max, 2 * p.n_r - 1);
    const double unit = 0.5 * std::pow(10.0, std::floor(std::log10(half.a_star)) - 4);
    rep.check(std::abs(p.a_star - half.a_star) < unit,
              "a* = " + fmt("%.10f", p.a_star) + " vs half-step " + fmt("%.10f", half.a_star));
    const double id = townes_identities(p).max_residual();
    rep.check(id < 1e-6, "identity residual " + fmt("%.2e", id));
    rep.note("Q(0) = " + fmt("%.10f", p.q0));
    return rep;
  }

  Report gn_bound() {
    Report rep;
    const Grid g(128, 10.0);
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> pos(-5, 5), width(0.5, 2.0), amp(0.1, 1.0);
    std::uniform_int_distribution<int> count(1, 6);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int k = count(rng);
      std::vector<std::array<double, 4>> bumps(k);
      for (auto& b : bumps) b = {pos(rng), pos(rng), width(rng), amp(rng)};
      FieldD u(g);
      for (int iy = 1; iy < g.n - 1; ++iy)
        for (int ix = 1; ix < g.n - 1; ++ix) {
          const double x = g.coord(ix), y = g.coord(iy);
          double s = 0;
          for (const auto& b : bumps)
            s += b[3] * std::exp(-((x - b[0]) * (x - b[0]) + (y - b[1]) * (y - b[1])) / (2 * b[2] * b[2]));
          u(iy, ix) = s;
        }
      worst = std::max(worst, gn_ratio(u, townes_.a_star));
    }
    rep.check(worst <= 1.01, "max ratio over 1000 random fields " + fmt("%.6f", worst));
    const Grid gq(256, 12.0);
    const double q = gn_ratio(q_on_grid(townes_, gq, Point(0, 0), 1.0), townes_.a_star);
    rep.check(std::abs(q - 1) <= 1e-3, "Townes field ratio " + fmt("%.8f", q));
    return rep;
  }

  Report linear_limit() {
    Report rep;
    const Grid g(opt_.n_linear, 6.0);
    const GroundState h = solve_ground_state(harmonic(), g, 0.0);
    rep.check(h.converged && std::abs(h.e - 2) <= 1e-3 && std::abs(h.mu - 2) <= 1e-3,
              "harmonic e = " + fmt("%.8f", h.e) + ", mu = " + fmt("%.8f", h.mu));
    const auto spec = make_potential({Disk{Point(-3, 0), 1.0}, Disk{Point(3, 0), 0.6},
                                      Rectangle{Point(0, 3.5), 1.0, 0.5}});
    const FieldD V = sample_potential(spec, g);
    const GroundState m = solve_ground_state(spec, V, 0.0);
    const double lambda = eigen_oracle(V).lambda;
    rep.check(m.converged && std::abs(m.e - lambda) <= 1e-6,
              "multi-well e = " + fmt("%.12f", m.e) + " vs eigen oracle " + fmt("%.12f", lambda));
    return rep;
  }

  Report derivative_law() {
    Report rep;
    const Grid g(opt_.n_linear, 6.0);
    std::vector<double> as;
    for (double f : {0.2, 0.25, 0.3, 0.35, 0.4}) as.push_back(f * townes_.a_star);
    const SweepResult r = run_sweep(harmonic(), g, as, sweep_config(), townes_);
    const auto d = derivative_check(r);
    std::vector<double> rel;
    for (const auto& e : d) rel.push_back(e.relerr);
    const bool ok = d.size() >= 3 && std::all_of(rel.begin(), rel.end(), [](double x) { return x < 1e-2; });
    rep.check(ok, "relative errors at " + std::to_string(d.size()) + " interior a: " + list(rel, "%.2e"));
    double worst = 0;
    bool conv = true;
    for (const auto& rec : r.records) {
      worst = std::max(worst, std::abs(rec.mu - (rec.e - rec.a / 2 * rec.quartic)) / std::abs(rec.mu));
      conv = conv && rec.converged;
    }
    rep.check(conv && worst <= 1e-8, "mu vs e - (a/2) quartic " + fmt("%.2e", worst));
    return rep;
  }

  static std::vector<double> last(const std::vector<SweepRecord>& recs, std::size_t k,
                                  double SweepRecord::*field) {
    std::vector<double> v;
    for (std::size_t i = recs.size() > k ? recs.size() - k : 0; i < recs.size(); ++i)
      v.push_back(recs[i].*field);
    return v;
  }

  static bool all_converged(const SweepResult& r) {
    return std::all_of(r.records.begin(), r.records.end(), [](const SweepRecord& x) { return x.converged; });
  }

  Report energy_asymptotics() {
    Report rep;
    const SweepResult& r = disk_sweep();
    rep.check(all_converged(r), "all records converged");
    const auto ratio = last(r.records, 5, &SweepRecord::energy_ratio);
    rep.check(strictly_decreasing(ratio), "energy_ratio over the last five " + list(ratio));
    const double fin = ratio.back();
    rep.check(fin >= 0.8 && fin <= 1.6, "final " + fmt("%.4f", fin) + " in [0.8, 1.6]");
    bool below = true;
    double worst = -INFINITY;
    for (const auto& rec : r.records) {
      below = below && std::isfinite(rec.trial_energy) && rec.e <= rec.trial_energy + 0.01 * std::abs(rec.trial_energy);
      worst = std::max(worst, rec.e / rec.trial_energy);
    }
    rep.check(below, "e <= trial energy at every record (max e/trial " + fmt("%.4f", worst) + ")");

    // Continuation-bias guard: cold start at the final a.
    const SweepRecord& end = r.records.back();
    SolverConfig cold = sweep_config();
    cold.init = TownesInit{Point(0, 0), predicted_eps(1.0, end.gap)};
    const GroundState gs = solve_ground_state(single_disk(), r.grid, end.a, cold);
    rep.note("cold start at the final a: |delta e| = " + fmt("%.2e", std::abs(gs.e - end.e)));
    return rep;
  }

  Report blowup_rate() {
    Report rep;
    const SweepResult& r = disk_sweep();
    const auto ratio = last(r.records, 5, &SweepRecord::eps_ratio);
    std::vector<double> dist;
    for (double x : ratio) dist.push_back(std::abs(x - 1));
    rep.check(strictly_decreasing(dist), "eps_ratio over the last five " + list(ratio));
    const double fin = ratio.back();
    rep.check(fin >= 0.7 && fin <= 1.4, "final " + fmt("%.4f", fin) + " in [0.7, 1.4]");
    return rep;
  }

  Report concentration() {
    Report rep;
    const PotentialSpec spec = two_disks();
    const SweepResult& r = sweep("two_disks", spec, 9.6);
    const auto lr = largest_inradius(spec);
    rep.check(all_converged(r), "all records converged");
    bool inside = true;
    int tail = 0;
    for (const auto& rec : r.records) {
      if (rec.a < 0.9 * r.a_star) continue;
      ++tail;
      const bool member = std::find(lr.winners.begin(), lr.winners.end(), rec.winner) != lr.winners.end();
      inside = inside && member && signed_distance(spec.wells[rec.winner], rec.zbar) <= 0;
    }
    rep.check(inside && tail > 0, "maximum in a largest well at all " + std::to_string(tail) + " tail records");
    const double vmax = zero_set_attraction(r, spec);
    rep.check(vmax == 0.0, "max V(zbar) over the tail " + fmt("%.3g", vmax));
    const double dist = r.records.back().dist_to_boundary;
    rep.check(std::abs(dist - lr.R) <= 0.15 * lr.R,
              "final dist_to_boundary " + fmt("%.4f", dist) + " vs R = " + fmt("%g", lr.R));
    return rep;
  }

  Report profile_convergence() {
    Report rep;
    const SweepResult& r = disk_sweep();
    std::vector<double> e_eps, e_log;
    for (const auto& rec : r.records) {
      if (rec.a < 0.9 * r.a_star) continue;
      if (std::isfinite(rec.profile_h1_err)) e_eps.push_back(rec.profile_h1_err);
      if (std::isfinite(rec.profile_h1_err_log)) e_log.push_back(rec.profile_h1_err_log);
    }
    rep.check(e_eps.size() >= 3 && strictly_decreasing(e_eps), "eps mode over the tail " + list(e_eps));
    rep.check(e_log.size() >= 3 && strictly_decreasing(e_log), "log mode over the tail " + list(e_log));
    const double fin = r.records.back().profile_h1_err;
    rep.check(fin < 0.1, "final eps-mode error " + fmt("%.4f", fin));
    return rep;
  }

  Report symmetry() {
    Report rep;
    {
      const Grid g(opt_.n, 6.0);
      const GroundState gs = solve_ground_state(harmonic(), g, 0.5 * townes_.a_star, sweep_config());
      const SymmetryReport s = symmetry_diagnostics(gs, harmonic());
      rep.check(gs.converged && s.angular_variance < 1e-6,
                "radial trap angular variance " + fmt("%.2e", s.angular_variance));
    }
    const PotentialSpec spec = annulus();
    const Grid g(opt_.n, 7.5);
    const FieldD V = sample_potential(spec, g);
    const double a = 0.95 * townes_.a_star;
    const double h = g.h();
    GroundState gs[2];
    SolverConfig cfg = sweep_config();
    for (int k = 0; k < 2; ++k) {
      cfg.init = RandomInit{std::uint64_t(k + 1)};
      gs[k] = solve_ground_state(spec, V, a, cfg);
      const SymmetryReport s = symmetry_diagnostics(gs[k], spec);
      const double rho = gs[k].zbar.norm();
      const double deg = std::atan2(gs[k].zbar.y(), gs[k].zbar.x()) * 180 / M_PI;
      rep.check(gs[k].converged, "seed " + std::to_string(k + 1) + " converged");
      rep.check(rho > 2 * h, "seed " + std::to_string(k + 1) + " |zbar| = " + fmt("%.4f", rho) + " at " +
                                 fmt("%.1f", deg) + " deg");
      rep.check(s.radial_offset < 2 * h, "seed " + std::to_string(k + 1) + " | |zbar| - 1.5 | = " +
                                             fmt("%.4f", s.radial_offset) + " vs 2h = " + fmt("%.4f", 2 * h));
    }
    const double de = std::abs(gs[0].e - gs[1].e);
    rep.check(de <= 10 * cfg.tol_energy, "seed energies differ by " + fmt("%.2e", de) + " (limit " +
                                             fmt("%.0e", 10 * cfg.tol_energy) + ")");
    const double sep = (gs[0].zbar - gs[1].zbar).norm();
    rep.check(sep > 2 * h, "seed maxima " + fmt("%.4f", sep) + " apart");
    return rep;
  }

  Report determinism() {
    Report rep;
    fs::path dir = opt_.scratch_dir.empty() ? fs::temp_directory_path() / "gpwells_verify" : fs::path(opt_.scratch_dir);
    fs::create_directories(dir);
    const Grid g(128, 3.0);
    SweepOptions so;
    so.keep_fields = true;
    std::string csv[2];
    SweepResult r;
    for (int k = 0; k < 2; ++k) {
      r = run_sweep(single_disk(), g, default_a_list(townes_.a_star), sweep_config(), townes_, so);
      const std::string path = (dir / ("sweep_" + std::to_string(k) + ".csv")).string();
      write_sweep_csv(path, r);
      csv[k] = read_bytes(path);
    }
    rep.check(!csv[0].empty() && csv[0] == csv[1], "rerun sweep CSV byte-identical (" +
                                                       std::to_string(csv[0].size()) + " bytes)");
    const auto back = read_sweep_csv((dir / "sweep_0.csv").string());
    rep.check(back.size() == r.records.size() && back.back().e == r.records.back().e, "sweep CSV reloads");

    bool fields_ok = true;
    for (std::size_t i = 0; i < r.fields.size(); ++i) {
      const std::string path = (dir / ("field_" + std::to_string(i) + ".gpf")).string();
      save_field(path, r.fields[i]);
      const FieldD u = load_field(path);
      fields_ok = fields_ok && u.grid() == r.fields[i].grid() &&
                  std::memcmp(u.values().data(), r.fields[i].values().data(),
                              sizeof(double) * std::size_t(g.n) * g.n) == 0;
    }
    rep.check(fields_ok && !r.fields.empty(), "field files round-trip bit-exact");

    const std::string tp = (dir / "townes.txt").string();
    save_profile(tp, townes_);
    const TownesProfile tb = load_profile(tp);
    rep.check(tb.q == townes_.q && tb.a_star == townes_.a_star, "profile file round-trips");
    const std::string pp = (dir / "potential.txt").string();
    save_potential(pp, two_disks());
    rep.check(potential_hash(load_potential(pp)) == potential_hash(two_disks()), "potential file round-trips");
    if (opt_.scratch_dir.empty()) fs::remove_all(dir);
    return rep;
  }
};

}  // namespace

std::vector<CriterionResult> run_verification(const VerifyOptions& options) {
  Suite suite(options);
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 10; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    CriterionResult c;
    c.id = id;
    c.name = kNames[id];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Report r = suite.run(id);
      c.pass = r.pass;
      c.detail = r.detail();
    } catch (const Error& e) {
      c.pass = false;
      c.detail = std::string("error kind=") + e.kind() + ": " + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (options.on_result) options.on_result(c);
    out.push_back(std::move(c));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "criterion %d [%s] %s: ", r.id, r.pass ? "PASS" : "FAIL", r.name.c_str());
  char tail[48];
  std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
  return head + r.detail + tail;
}

}  // namespace gpwells
