#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gpwells/asymptotics.hpp"
#include "gpwells/field_io.hpp"
#include "gpwells/plot.hpp"
#include "gpwells/verify.hpp"

namespace fs = std::filesystem;
using namespace gpwells;

namespace {

struct RunConfig {
  std::string potential;
  std::string a;
  std::string a_list;
  int grid_n = 0;       // 0: auto
  double grid_L = 0;    // 0: auto
  double dt = 0.1;
  double tol = 1e-8;
  int max_iters = 5000;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool cold = false;
  double townes_tol = 1e-10;
  std::vector<int> criteria;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  double x = 0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigurationError("bad number for " + what + ": '" + s + "'");
  return x;
}

// "<val>" or "frac:<x>" with x in [0, 1).
double parse_a(const std::string& s, double a_star) {
  if (s.rfind("frac:", 0) == 0) {
    const double f = parse_double(s.substr(5), "a fraction");
    if (!(f >= 0 && f < 1)) throw ConfigurationError("a fraction must lie in [0, 1), got " + s);
    return f * a_star;
  }
  return parse_double(s, "a");
}

std::vector<double> parse_a_list(const std::string& s, double a_star) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item.empty()) throw ConfigurationError("empty entry in --a-list");
    out.push_back(parse_a(item, a_star));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

PotentialSpec load_spec(const RunConfig& rc) {
  if (rc.potential.empty()) throw ConfigurationError("--potential is required");
  if (!fs::exists(rc.potential)) throw ConfigurationError("potential file not found: " + rc.potential);
  return load_potential(rc.potential);
}

Grid make_grid(const RunConfig& rc, const PotentialSpec& spec, double a_max, double a_star) {
  const double L = rc.grid_L > 0 ? rc.grid_L : auto_grid_L(spec);
  const int n = rc.grid_n > 0 ? rc.grid_n : auto_grid_n(spec, L, a_max, a_star);
  return Grid(n, L);
}

SolverConfig solver_config(const RunConfig& rc, const PotentialSpec& spec) {
  SolverConfig c;
  c.dt = rc.dt;
  c.tol_residual = rc.tol;
  c.max_iters = rc.max_iters;
  c.flow_steps = 10;
  if (rc.seed) {
    c.init = RandomInit{*rc.seed};
  } else if (!spec.wells.empty()) {
    const auto lr = largest_inradius(spec);
    c.init = GaussianInit{lr.wells[lr.winners.front()].incenters.front(), lr.R};
  } else {
    c.init = GaussianInit{spec.radial->center, 1.0};
  }
  return c;
}

int threads() {
  int t = int(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("GPWELLS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) t = std::min(t, cap);
  }
  return t;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw FormatError("short write to " + path.string());
}

fs::path out_dir(const RunConfig& rc) {
  fs::create_directories(rc.out);
  return fs::path(rc.out);
}

int cmd_townes(const RunConfig& rc) {
  const TownesProfile p = solve_townes(rc.townes_tol);
  const auto id = townes_identities(p);
  const fs::path dir = out_dir(rc);
  save_profile((dir / "townes_profile.txt").string(), p);
  std::string report;
  report += "q0 = " + num(p.q0) + "\n";
  report += "a_star = " + num(p.a_star) + "\n";
  report += "decay_rate = " + num(p.decay_rate) + "\n";
  report += "r_trust = " + num(p.r_trust) + "\n";
  report += "kinetic = " + num(id.kinetic) + "\n";
  report += "mass = " + num(id.mass) + "\n";
  report += "quartic = " + num(id.quartic) + "\n";
  report += "residual_k_over_m = " + num(id.k_over_m) + "\n";
  report += "residual_2k_over_p = " + num(id.two_k_over_p) + "\n";
  report += "residual_2m_over_p = " + num(id.two_m_over_p) + "\n";
  write_text(dir / "townes_identities.txt", report);
  std::fputs(report.c_str(), stdout);
  return id.max_residual() < 1e-6 ? 0 : 1;
}

int cmd_solve(const RunConfig& rc) {
  if (rc.a.empty()) throw ConfigurationError("--a is required");
  const PotentialSpec spec = load_spec(rc);
  const TownesProfile& townes = reference_townes();
  const double a = parse_a(rc.a, townes.a_star);
  const Grid grid = make_grid(rc, spec, a, townes.a_star);
  const GroundState gs = solve_ground_state(spec, grid, a, solver_config(rc, spec));
  const fs::path dir = out_dir(rc);
  save_field((dir / "ground_state.gpf").string(), gs.u);
  std::string s;
  s += "a = " + num(gs.a) + "\n";
  s += "a_star = " + num(townes.a_star) + "\n";
  s += "grid_n = " + std::to_string(grid.n) + "\n";
  s += "grid_L = " + num(grid.L) + "\n";
  s += "potential_hash = " + std::to_string(potential_hash(spec)) + "\n";
  s += "e = " + num(gs.e) + "\n";
  s += "kinetic = " + num(gs.breakdown.kinetic) + "\n";
  s += "potential = " + num(gs.breakdown.potential) + "\n";
  s += "quartic = " + num(gs.breakdown.quartic) + "\n";
  s += "mu = " + num(gs.mu) + "\n";
  s += "eps = " + num(gs.eps) + "\n";
  s += "zbar_x = " + num(gs.zbar.x()) + "\n";
  s += "zbar_y = " + num(gs.zbar.y()) + "\n";
  s += "zbar_tie = " + std::string(gs.zbar_tie ? "true" : "false") + "\n";
  s += "residual = " + num(gs.residual) + "\n";
  s += "iters = " + std::to_string(gs.iters) + "\n";
  s += "flow_iters = " + std::to_string(gs.flow_iters) + "\n";
  s += "newton_iters = " + std::to_string(gs.newton_iters) + "\n";
  s += "converged = " + std::string(gs.converged ? "true" : "false") + "\n";
  for (const auto& w : gs.warnings) s += "warning = " + w + "\n";
  write_text(dir / "ground_state.txt", s);
  std::fputs(s.c_str(), stdout);
  return gs.converged ? 0 : 1;
}

int cmd_sweep(const RunConfig& rc) {
  if (rc.a_list.empty()) throw ConfigurationError("--a-list is required");
  const PotentialSpec spec = load_spec(rc);
  const TownesProfile& townes = reference_townes();
  const std::vector<double> as = parse_a_list(rc.a_list, townes.a_star);
  const Grid grid = make_grid(rc, spec, *std::max_element(as.begin(), as.end()), townes.a_star);
  SweepOptions so;
  so.warm_start = !rc.cold;
  so.threads = threads();
  so.keep_fields = true;
  const SweepResult r = run_sweep(spec, grid, as, solver_config(rc, spec), townes, so);
  const fs::path dir = out_dir(rc);
  write_sweep_csv((dir / "sweep.csv").string(), r);
  for (std::size_t i = 0; i < r.fields.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "record_%03zu.gpf", i);
    save_field((dir / name).string(), r.fields[i]);
  }
  write_sweep_plots(dir.string(), spec, r.records);
  std::fputs(sweep_csv(r).c_str(), stdout);
  bool ok = true;
  for (const auto& rec : r.records) {
    if (!rec.converged) {
      std::fprintf(stderr, "warning: record a = %.17g did not converge (residual %.3g)\n", rec.a, rec.residual);
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

int cmd_verify(const RunConfig& rc) {
  VerifyOptions opt;
  if (rc.grid_n > 0) opt.n = rc.grid_n;
  opt.out_dir = rc.out;
  opt.only = rc.criteria;
  opt.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
  opt.on_result = [](const CriterionResult& r) {
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
  };
  int failed = 0;
  for (const auto& r : run_verification(opt)) failed += !r.pass;
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}

int cmd_potential_info(const RunConfig& rc) {
  const PotentialSpec spec = load_spec(rc);
  if (spec.wells.empty()) {
    const auto& r = *spec.radial;
    std::printf("radial center = (%s, %s) coefficient = %s exponent = %s\n", num(r.center.x()).c_str(),
                num(r.center.y()).c_str(), num(r.coefficient).c_str(), num(r.exponent).c_str());
    return 0;
  }
  const auto lr = largest_inradius(spec);
  for (const auto& w : lr.wells) {
    std::printf("well %d %s R_i = %.10g incenters =", w.index, shape_name(spec.wells[w.index]), w.inradius);
    const std::size_t shown = std::min<std::size_t>(w.incenters.size(), 8);
    for (std::size_t k = 0; k < shown; ++k) std::printf(" (%.6g, %.6g)", w.incenters[k].x(), w.incenters[k].y());
    if (shown < w.incenters.size()) std::printf(" ... %zu total", w.incenters.size());
    std::printf("\n");
  }
  std::printf("R = %.10g\n", lr.R);
  std::printf("Lambda = {");
  for (std::size_t k = 0; k < lr.winners.size(); ++k) std::printf("%s%d", k ? ", " : "", lr.winners[k]);
  std::printf("}\n");
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  std::string m;
  for (char c : message) {
    if (c == '"' || c == '\\') m += '\\';
    m += c == '\n' ? ' ' : c;
  }
  std::fprintf(stderr, "error: kind=%s message=\"%s\"\n", kind.c_str(), m.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of 2D Gross-Pitaevskii functionals with multi-well potentials"};
  app.require_subcommand(1);
  RunConfig rc;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--potential", rc.potential, "potential file");
    sub->add_option("--grid-n", rc.grid_n, "grid nodes per side (default: auto)");
    sub->add_option("--grid-L", rc.grid_L, "box half-width (default: auto)");
    sub->add_option("--dt", rc.dt, "flow step");
    sub->add_option("--tol", rc.tol, "residual tolerance");
    sub->add_option("--max-iters", rc.max_iters, "iteration cap");
    sub->add_option("--seed", rc.seed, "random initial state seed");
    sub->add_option("--out", rc.out, "output directory");
  };

  auto* townes = app.add_subcommand("townes", "solve for the Townes profile and a*");
  townes->add_option("--tol", rc.townes_tol, "bisection tolerance");
  townes->add_option("--out", rc.out, "output directory");

  auto* solve = app.add_subcommand("solve", "ground state at one interaction strength");
  common(solve);
  solve->add_option("--a", rc.a, "interaction strength, value or frac:x");

  auto* sweep = app.add_subcommand("sweep", "ground states along a list of strengths");
  common(sweep);
  sweep->add_option("--a-list", rc.a_list, "comma-separated strengths, values or frac:x");
  sweep->add_flag("--cold", rc.cold, "cold-start every record (parallel)");

  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_option("--grid-n", rc.grid_n, "grid nodes per side for the near-critical runs");
  verify->add_option("--out", rc.out, "directory for sweep artifacts");
  verify->add_option("--criteria", rc.criteria, "restrict to these criterion ids");

  auto* info = app.add_subcommand("potential-info", "inradii, incenters and the largest wells");
  info->add_option("--potential", rc.potential, "potential file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*townes) return cmd_townes(rc);
    if (*solve) return cmd_solve(rc);
    if (*sweep) return cmd_sweep(rc);
    if (*verify) return cmd_verify(rc);
    if (*info) return cmd_potential_info(rc);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 2;
  }
  return 2;
}
