#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fchflow/config.hpp"
#include "fchflow/csv.hpp"
#include "fchflow/diagnostics.hpp"
#include "fchflow/errors.hpp"
#include "fchflow/initial_conditions.hpp"
#include "fchflow/model.hpp"
#include "fchflow/snapshot.hpp"
#include "fchflow/solver.hpp"
#include "fchflow/spectral.hpp"
#include "fchflow/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fchflow;

namespace {

constexpr const char* kCodeVersion = "fchflow 1.0.0";

json accumulators_to_json(const AccumulatorState& a) {
  return json{
      {"prev_total", a.prev_total},
      {"prev_t", a.prev_t},
      {"has_prev", a.has_prev},
      {"cached",
       {{"u_l4", a.cached.u_l4},
        {"u_l6", a.cached.u_l6},
        {"u_linf", a.cached.u_linf},
        {"gradu_l2", a.cached.gradu_l2},
        {"gradu_l3", a.cached.gradu_l3},
        {"gradu_l6", a.cached.gradu_l6}}},
      {"h_a_cached", a.h_a_cached},
      {"int_u_l4_q8", a.int_u_l4_q8},
      {"int_u_l6_q4", a.int_u_l6_q4},
      {"int_u_linf_q2", a.int_u_linf_q2},
      {"int_gradu_l2_q4", a.int_gradu_l2_q4},
      {"int_gradu_l3_q2", a.int_gradu_l3_q2},
      {"h_a_integral", a.h_a_integral},
      {"observations", a.observations},
  };
}

AccumulatorState accumulators_from_json(const json& j) {
  AccumulatorState a;
  a.prev_total = j.at("prev_total").get<double>();
  a.prev_t = j.at("prev_t").get<double>();
  a.has_prev = j.at("has_prev").get<bool>();
  const json& c = j.at("cached");
  a.cached.u_l4 = c.at("u_l4").get<double>();
  a.cached.u_l6 = c.at("u_l6").get<double>();
  a.cached.u_linf = c.at("u_linf").get<double>();
  a.cached.gradu_l2 = c.at("gradu_l2").get<double>();
  a.cached.gradu_l3 = c.at("gradu_l3").get<double>();
  a.cached.gradu_l6 = c.at("gradu_l6").get<double>();
  a.h_a_cached = j.at("h_a_cached").get<double>();
  a.int_u_l4_q8 = j.at("int_u_l4_q8").get<double>();
  a.int_u_l6_q4 = j.at("int_u_l6_q4").get<double>();
  a.int_u_linf_q2 = j.at("int_u_linf_q2").get<double>();
  a.int_gradu_l2_q4 = j.at("int_gradu_l2_q4").get<double>();
  a.int_gradu_l3_q2 = j.at("int_gradu_l3_q2").get<double>();
  a.h_a_integral = j.at("h_a_integral").get<double>();
  a.observations = j.at("observations").get<std::size_t>();
  return a;
}

// The running-integral state rides next to each snapshot so a restarted
// run can continue the Serrin accumulators instead of resetting them.
std::string sidecar_path(const std::string& snapshot) {
  return snapshot + ".state.json";
}

void write_sidecar(const std::string& snapshot, const AccumulatorState& acc) {
  const std::string path = sidecar_path(snapshot);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write accumulator sidecar: " + tmp);
    out << accumulators_to_json(acc).dump(2) << "\n";
    out.flush();
    if (!out) throw IoError("write failed on sidecar: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move sidecar into place: " + path);
}

bool read_sidecar(const std::string& snapshot, AccumulatorState& acc) {
  const std::string path = sidecar_path(snapshot);
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  try {
    json j;
    in >> j;
    acc = accumulators_from_json(j);
  } catch (const json::exception& e) {
    throw IoError("unreadable accumulator sidecar " + path + ": " + e.what());
  }
  return true;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct CommonOpts {
  std::string config;
  std::string out;
  unsigned long long seed = 0;
  bool seed_set = false;
  bool quiet = false;
};

RunConfig load_with_overrides(const CommonOpts& o) {
  RunConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output.directory = o.out;
  if (o.seed_set) cfg.ic.seed = o.seed;
  return cfg;
}

int cmd_run(const CommonOpts& o) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_with_overrides(o);
  const fs::path dir(cfg.output.directory);
  fs::create_directories(dir);

  const Grid g(cfg.grid);
  PhaseState state;
  AccumulatorState acc;
  bool restarted = false;
  bool accumulators_restored = false;
  if (cfg.ic.phi == "restart") {
    state = read_snapshot(cfg.ic.restart, cfg.model, cfg.grid.dealias_fraction);
    if (!state.phi().grid().compatible_with(g))
      throw ConfigError("restart snapshot grid differs from the [grid] block");
    restarted = true;
    accumulators_restored = read_sidecar(cfg.ic.restart, acc);
    if (!accumulators_restored && !o.quiet)
      std::cerr << "note: no accumulator sidecar next to " << cfg.ic.restart
                << "; running integrals restart from zero\n";
  } else {
    state = PhaseState::create(cfg.model, initial_phi(g, cfg.ic),
                               initial_velocity(g, cfg.ic), 0.0);
  }
  SolverConfig scfg = make_solver_config(cfg, g);
  if (!(scfg.t_end > state.t))
    throw ConfigError("solver.t_end does not lie beyond the starting time");

  DiagnosticsCollector coll(
      cfg.model,
      DiagnosticsOptions{cfg.output.diagnostics_every, cfg.output.lp_every,
                         cfg.gamma});
  if (accumulators_restored) coll.restore(acc);

  CsvWriter csv((dir / "diagnostics.csv").string(), diagnostics_csv_header());

  std::vector<double> snap_times = cfg.output.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  while (next_snap < snap_times.size() && snap_times[next_snap] <= state.t)
    ++next_snap;

  json manifest;
  manifest["code_version"] = kCodeVersion;
  manifest["command"] = "run";
  manifest["config_path"] = o.config;
  manifest["config"] = serialize_config(cfg);
  manifest["seed"] = cfg.ic.seed;
  manifest["restarted"] = restarted;
  if (restarted) manifest["accumulators_restored"] = accumulators_restored;

  std::size_t steps_done = 0;
  int exit_code = 0;
  try {
    // a fresh run observes its initial state; a restart already observed
    // this instant at the end of the previous leg
    if (!restarted) {
      if (auto rec = coll.observe(state)) csv.row(diagnostics_csv_row(*rec));
    }
    run(state, cfg.model, scfg, [&](const PhaseState& s, std::size_t step) {
      steps_done = step;
      if (auto rec = coll.observe(s)) csv.row(diagnostics_csv_row(*rec));
      while (next_snap < snap_times.size() &&
             s.t >= snap_times[next_snap] - 1e-9) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%03zu.fchf", next_snap);
        const std::string p = (dir / name).string();
        write_snapshot(p, s);
        write_sidecar(p, coll.accumulators());
        ++next_snap;
      }
    });
  } catch (const BlowUpError& e) {
    manifest["blow_up"] = {{"t", e.t}, {"monitor", e.monitor}};
    exit_code = 2;
  }

  if (exit_code == 0) {
    const std::string final_path = (dir / "final.fchf").string();
    write_snapshot(final_path, state);
    write_sidecar(final_path, coll.accumulators());
  }

  manifest["completed"] = exit_code == 0;
  manifest["steps"] = steps_done;
  manifest["final_time"] = state.t;
  manifest["wall_time_seconds"] = elapsed_seconds(wall0);
  write_manifest(dir, manifest);

  if (!o.quiet) {
    if (exit_code == 0)
      std::cout << "completed " << steps_done << " steps to t = " << state.t
                << "; outputs in " << dir.string() << "\n";
    else
      std::cout << "blow-up detected: "
                << manifest["blow_up"]["monitor"].get<std::string>()
                << " diverged at t = " << manifest["blow_up"]["t"].get<double>()
                << "; partial outputs in " << dir.string() << "\n";
  }
  return exit_code;
}

int cmd_twin(const CommonOpts& o) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_with_overrides(o);
  if (!cfg.twin.enabled)
    throw ConfigError("twin runs need twin.enabled = true in the config");
  const fs::path dir(cfg.output.directory);
  fs::create_directories(dir);

  const Grid g(cfg.grid);
  const Field phi0 = initial_phi(g, cfg.ic);
  const VectorField u0 = initial_velocity(g, cfg.ic);
  const PhaseState s1 = PhaseState::create(cfg.model, phi0, u0, 0.0);

  Field phi2 = to_physical(phi0);
  axpy(1.0, to_physical(twin_perturbation(g, cfg.ic, cfg.twin)), phi2);
  const PhaseState s2 = PhaseState::create(cfg.model, phi2, u0, 0.0);

  const SolverConfig scfg = make_solver_config(cfg, g);
  const TwinResult res =
      twin_run(s1, s2, cfg.model, scfg,
               TwinOptions{cfg.twin.fit_window_fraction, cfg.twin.sample_every});

  CsvWriter csv((dir / "twin.csv").string(), twin_csv_header());
  for (const auto& rec : res.records) csv.row(twin_csv_row(rec));

  json manifest;
  manifest["code_version"] = kCodeVersion;
  manifest["command"] = "twin";
  manifest["config_path"] = o.config;
  manifest["config"] = serialize_config(cfg);
  manifest["seed"] = cfg.ic.seed;
  manifest["perturbation_seed"] = cfg.twin.seed;
  manifest["c_fit"] = res.c_fit;
  manifest["envelope_violated"] = res.violated;
  if (res.violated) manifest["first_violation_t"] = res.first_violation_t;
  manifest["samples"] = res.records.size();
  manifest["wall_time_seconds"] = elapsed_seconds(wall0);
  write_manifest(dir, manifest);

  if (!o.quiet) {
    if (res.violated)
      std::cout << "envelope violated at t = " << res.first_violation_t
                << " (c_fit = " << res.c_fit << "); twin.csv in "
                << dir.string() << "\n";
    else
      std::cout << "envelope respected over " << res.records.size()
                << " samples (c_fit = " << res.c_fit << "); twin.csv in "
                << dir.string() << "\n";
  }
  return res.violated ? 3 : 0;
}

int cmd_inspect(const std::string& path) {
  const SnapshotHeader h = read_snapshot_header(path);
  std::cout << "path: " << path << "\n";
  std::cout << "format version: " << h.version << "\n";
  std::cout << "dim: " << h.dim << "\n";
  std::cout << "n:";
  for (int a = 0; a < h.dim; ++a) std::cout << " " << h.n[a];
  std::cout << "\n";
  std::cout << "length:";
  char buf[40];
  for (int a = 0; a < h.dim; ++a) {
    std::snprintf(buf, sizeof buf, "%.17g", h.length[a]);
    std::cout << " " << buf;
  }
  std::cout << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", h.t);
  std::cout << "t: " << buf << "\n";
  std::cout << "fields:";
  for (const auto& f : h.fields) std::cout << " " << f;
  std::cout << "\n";
  std::cout << "payload: " << h.fields.size() * h.points() * 8 << " bytes\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify: the library's analytical cross-checks, reported as a table.

struct SuiteResult {
  bool pass = false;
  std::string detail;
};

ModelParams verify_params(double eta, double nu, double m) {
  ModelParams p;
  p.eta = eta;
  p.viscosity = CoefficientLaw::constant(nu);
  p.mobility = CoefficientLaw::constant(m);
  p.finalize();
  return p;
}

// Smooth test fields: the filter leaves ~2e-9 at the mask cutoff, so
// quadrature tails sit far below the suite gates.
Field noise_field(const Grid& g, unsigned long long seed, double amplitude) {
  IcConfig ic;
  ic.phi = "random";
  ic.phi_mean = 0.0;
  ic.amplitude = amplitude;
  ic.seed = seed;
  ic.filter = 20.0;
  return initial_phi(g, ic);
}

std::string fmt_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

SuiteResult suite_variational(bool corrupt_mu) {
  GridConfig gc;
  gc.n = {32, 32, 1};
  const Grid g(gc);
  double worst = 0.0;
  for (double eta : {-1.0, 0.5}) {
    const ModelParams p = verify_params(eta, 1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
      const Field phi = noise_field(g, 500 + 7ull * i, 0.9);
      const Field psi = noise_field(g, 900 + 13ull * i, 1.0);
      Field mu = compute_mu(phi, p);
      if (corrupt_mu)
        for (auto& v : mu.phys()) v *= 1.0 + 1e-3;
      const double rhs = inner(mu, psi);
      const double lhs = variational_oracle(phi, psi, 1e-5, p);
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
  }
  return {worst <= 1e-6,
          "max relative gap " + fmt_sci(worst) + " over 20 pairs (gate 1e-6)"};
}

SuiteResult suite_potential_identity() {
  const Potential pot;
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double s = 6.0 * ((rng() >> 11) * 0x1.0p-53) - 3.0;
    const double lhs = s * pot.f(s, 0) - 2.0 * pot.F(s);
    const double rhs = 0.5 * s * s * s * s - 0.5;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return {worst <= 1e-13,
          "max |s f(s) - 2F(s) - (s^4/2 - 1/2)| = " + fmt_sci(worst) +
              " over 1e6 samples (gate 1e-13)"};
}

SuiteResult suite_mms_residual() {
  double worst = 0.0;
  {
    GridConfig gc;
    gc.n = {32, 32, 1};
    const Grid g(gc);
    const ModelParams p = verify_params(0.8, 0.2, 0.2);
    const MMSCase c = make_mms("decaying-product", g, p);
    for (double t : {0.0, 0.25}) {
      const MMSResidual r = mms_residual(c, p, t);
      worst = std::max({worst, r.phi, r.u});
    }
  }
  {
    GridConfig gc;
    gc.n = {128, 8, 1};
    gc.dealias_fraction = 1.0;
    const Grid g(gc);
    const ModelParams p = verify_params(1.0, 0.05, 0.05);
    const MMSCase c = make_mms("steady-stripe", g, p);
    const MMSResidual r = mms_residual(c, p, 0.0);
    worst = std::max({worst, r.phi, r.u});
  }
  return {worst <= 1e-9, "max residual " + fmt_sci(worst) +
                             " across both manufactured cases (gate 1e-9)"};
}

SuiteResult suite_temporal(Scheme scheme, const std::string& out_dir) {
  GridConfig gc;
  const char* csv_name;
  ModelParams p;
  double lo, hi;
  if (scheme == Scheme::SemiImplicitEuler) {
    gc.n = {32, 32, 1};
    p = verify_params(0.8, 0.2, 0.2);
    lo = 0.8;
    hi = 1.2;
    csv_name = "temporal_sie.csv";
  } else {
    gc.n = {8, 8, 1};
    gc.dealias_fraction = 1.0;
    p = verify_params(0.8, 0.05, 0.05);
    lo = 3.6;
    hi = 4.4;
    csv_name = "temporal_rk4.csv";
  }
  const Grid g(gc);
  const ConvergenceStudy s = temporal_convergence(
      "decaying-product", g, p, scheme, {8e-4, 4e-4, 2e-4}, 0.02);
  if (!out_dir.empty()) {
    std::ofstream out(fs::path(out_dir) / csv_name);
    out << study_csv(s);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "slope %.3f (gate [%.1f, %.1f])%s", s.slope,
                lo, hi, s.monotone ? "" : ", non-monotone errors");
  return {s.slope >= lo && s.slope <= hi, buf};
}

SuiteResult suite_spatial(const std::string& out_dir) {
  const ModelParams p = verify_params(1.0, 0.05, 0.05);
  const ConvergenceStudy s =
      spatial_convergence("steady-stripe", p, {12, 16, 20, 24, 32}, 2e-3, 60);
  if (!out_dir.empty()) {
    std::ofstream out(fs::path(out_dir) / "spatial.csv");
    out << study_csv(s);
  }
  bool pass = true;
  double plateau = 0.0;
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    if (s.levels[i] > 18.0) {
      plateau = std::max(plateau, s.errors[i]);
      if (s.errors[i] > 1e-8) pass = false;
    }
  }
  return {pass, "max error past twice the bandwidth " + fmt_sci(plateau) +
                    " (gate 1e-8)"};
}

SuiteResult suite_norm_crosscheck() {
  GridConfig gc;
  gc.n = {48, 48, 1};
  const Grid g(gc);
  double worst = 0.0;
  for (double pexp : {2.0, 4.0, 6.0}) {
    const Field f = noise_field(g, 77, 1.0);
    const double ref = bruteforce_lp_norm(f, pexp);
    const double got = lp_norm(to_physical(f), pexp);
    worst = std::max(worst, std::abs(got - ref) / std::max(ref, 1e-300));
  }
  const Field c = Field::sample(
      g, [](const std::array<double, 3>& x) { return std::cos(x[0]); });
  const double closed = std::pow(0.375 * g.volume(), 0.25);
  const double got = bruteforce_lp_norm(c, 4.0);
  worst = std::max(worst, std::abs(got - closed) / closed);
  return {worst <= 1e-8, "max relative disagreement " + fmt_sci(worst) +
                             " vs doubled-resolution quadrature (gate 1e-8)"};
}

int cmd_verify(bool list, const std::string& only, bool corrupt_mu,
               const std::string& out_dir, bool quiet) {
  struct Suite {
    const char* name;
    std::function<SuiteResult()> fn;
  };
  const std::vector<Suite> suites = {
      {"variational-oracle", [&] { return suite_variational(corrupt_mu); }},
      {"potential-identity", [] { return suite_potential_identity(); }},
      {"mms-residual", [] { return suite_mms_residual(); }},
      {"temporal-order-sie",
       [&] { return suite_temporal(Scheme::SemiImplicitEuler, out_dir); }},
      {"temporal-order-rk4",
       [&] { return suite_temporal(Scheme::ExplicitRK4, out_dir); }},
      {"spatial-plateau", [&] { return suite_spatial(out_dir); }},
      {"norm-crosscheck", [] { return suite_norm_crosscheck(); }},
  };

  if (list) {
    for (const auto& s : suites) std::cout << s.name << "\n";
    return 0;
  }
  if (!only.empty()) {
    const bool known = std::any_of(suites.begin(), suites.end(),
                                   [&](const Suite& s) { return only == s.name; });
    if (!known) {
      std::cerr << "unknown suite: " << only << " (see verify --list)\n";
      return 1;
    }
  }
  if (!out_dir.empty()) fs::create_directories(out_dir);

  bool all_pass = true;
  for (const auto& s : suites) {
    if (!only.empty() && only != s.name) continue;
    const SuiteResult r = s.fn();
    all_pass = all_pass && r.pass;
    if (!quiet || !r.pass)
      std::printf("%-20s %s  %s\n", s.name, r.pass ? "PASS" : "FAIL",
                  r.detail.c_str());
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral simulator for coupled phase-field and "
               "incompressible flow"};
  app.footer("exit codes: 0 success, 1 config or I/O error, 2 blow-up "
             "detected, 3 twin envelope violation.\n"
             "FCHFLOW_THREADS caps worker parallelism in the verification "
             "studies.");
  app.require_subcommand(1);

  CommonOpts run_opts, twin_opts;
  auto add_common = [](CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "run configuration file")
        ->required();
    cmd->add_option("--out", o.out, "override output.directory");
    cmd->add_option("--seed", o.seed, "override ic.seed")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--quiet", o.quiet, "suppress the completion summary");
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "advance a configured simulation");
  add_common(run_cmd, run_opts);

  CLI::App* twin_cmd = app.add_subcommand(
      "twin", "march two perturbed copies and check the distance envelope");
  add_common(twin_cmd, twin_opts);

  bool verify_list = false, corrupt_mu = false, verify_quiet = false;
  std::string verify_suite, verify_out;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "run the analytical verification suites and print a table");
  verify_cmd->add_flag("--list", verify_list, "print suite names and exit");
  verify_cmd->add_option("--suite", verify_suite, "run a single suite");
  verify_cmd->add_option("--out", verify_out,
                         "directory for convergence-study csv output");
  verify_cmd->add_flag("--quiet", verify_quiet, "print failing rows only");
  verify_cmd->add_flag("--corrupt-mu", corrupt_mu)->group("");

  std::string inspect_path;
  CLI::App* inspect_cmd =
      app.add_subcommand("inspect", "print a snapshot file's header");
  inspect_cmd->add_option("snapshot", inspect_path, "snapshot file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      run_opts.seed_set = run_cmd->count("--seed") > 0;
      return cmd_run(run_opts);
    }
    if (twin_cmd->parsed()) {
      twin_opts.seed_set = twin_cmd->count("--seed") > 0;
      return cmd_twin(twin_opts);
    }
    if (verify_cmd->parsed())
      return cmd_verify(verify_list, verify_suite, corrupt_mu, verify_out,
                        verify_quiet);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_path);
  } catch (const BlowUpError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
