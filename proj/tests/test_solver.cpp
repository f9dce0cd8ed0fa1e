#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fchflow/errors.hpp"
#include "fchflow/model.hpp"
#include "fchflow/solver.hpp"
#include "fchflow/spectral.hpp"
#include "test_util.hpp"

using namespace fchflow;
using namespace fchflow::testutil;

namespace {

ModelParams constant_params(double eta, double nu, double m) {
  ModelParams p;
  p.eta = eta;
  p.viscosity = CoefficientLaw::constant(nu);
  p.mobility = CoefficientLaw::constant(m);
  p.finalize();
  return p;
}

VectorField taylor_green(const Grid& g, double amplitude) {
  return VectorField::sample(g, [amplitude](std::array<double, 3> x) {
    return std::array<double, 3>{amplitude * std::sin(x[0]) * std::cos(x[1]),
                                 -amplitude * std::cos(x[0]) * std::sin(x[1]),
                                 0.0};
  });
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("config validation rejects bad steps and unstable explicit runs") {
  Grid g(GridConfig{});
  ModelParams p = constant_params(0.0, 1.0, 1.0);

  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  CHECK_NOTHROW(cfg.validate(g, p));

  SolverConfig bad = cfg;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(g, p), ConfigError);
  bad = cfg;
  bad.t_end = -1.0;
  CHECK_THROWS_AS(bad.validate(g, p), ConfigError);
  bad = cfg;
  bad.cfl_safety = 0.0;
  CHECK_THROWS_AS(bad.validate(g, p), ConfigError);
  bad = cfg;
  bad.cfl_safety = 1.2;
  CHECK_THROWS_AS(bad.validate(g, p), ConfigError);

  // dt = 1e-3 is far beyond the k^6 stability ceiling of the explicit
  // scheme on a 64^2 grid with unit mobility.
  bad = cfg;
  bad.scheme = Scheme::ExplicitRK4;
  CHECK_THROWS_AS(bad.validate(g, p), ConfigError);
}

TEST_CASE("rk4 stiffness ceiling matches the closed form and scales like 2^6") {
  GridConfig gc;
  Grid g64(gc);
  gc.n = {32, 32, 1};
  Grid g32(gc);

  ModelParams p = constant_params(0.0, 0.1, 1.0);
  // cutoff 10 on each axis, so k_max^2 = 200
  const double k2 = 200.0;
  CHECK(rk4_stiffness_dt(g64, p) ==
        doctest::Approx(2.78 / (k2 * k2 * k2 + 0.1 * k2)).epsilon(1e-12));

  // with negligible viscosity the ceiling is dominated by k^6, and halving
  // the resolution doubles the grid spacing: ratio 2^6
  ModelParams thin = constant_params(0.0, 1e-6, 1.0);
  const double ratio = rk4_stiffness_dt(g32, thin) / rk4_stiffness_dt(g64, thin);
  CHECK(ratio == doctest::Approx(64.0).epsilon(1e-6));
}

TEST_CASE("advective step limit uses min spacing over max speed") {
  Grid g(GridConfig{});
  ModelParams p = constant_params(0.0, 1.0, 1.0);
  SolverConfig cfg;
  cfg.cfl_safety = 0.5;

  PhaseState s = PhaseState::create(
      p, Field::sample(g, [](std::array<double, 3>) { return 0.0; }),
      taylor_green(g, 1.0));
  // max |u| = 1 is attained at a grid point of the unit Taylor-Green field
  CHECK(stable_dt(s, cfg) == doctest::Approx(0.5 * g.dx(0)).epsilon(1e-9));

  PhaseState rest = PhaseState::create(
      p, Field::sample(g, [](std::array<double, 3>) { return 0.0; }),
      VectorField(g, Repr::Physical));
  CHECK(stable_dt(rest, cfg) >= 1e300);
}

TEST_CASE("uniform rest state is a fixed point up to roundoff") {
  Grid g(GridConfig{});
  ModelParams p = constant_params(-1.0, 1.0, 1.0);
  PhaseState s = PhaseState::create(
      p, Field::sample(g, [](std::array<double, 3>) { return 0.3; }),
      VectorField(g, Repr::Physical));
  const Field phi0 = to_physical(s.phi());

  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 1.0;
  RunResult res = run(s, p, cfg);
  CHECK(res.steps == 100);

  CHECK(max_abs_diff(to_physical(s.phi()), phi0) <= 1e-12);
  CHECK(lp_norm(to_physical(s.u()),
                std::numeric_limits<double>::infinity()) <= 1e-13);
}

TEST_CASE("phase mean is conserved bitwise by both schemes") {
  GridConfig gc;
  gc.n = {32, 32, 1};
  Grid g(gc);

  ModelParams p;
  p.eta = -1.0;
  p.viscosity = CoefficientLaw::bounded_smooth(0.5, 1.0, 0.2);
  p.mobility = CoefficientLaw::bounded_smooth(0.3, 0.4, 0.1);
  p.finalize();

  Field phi0 = random_smooth_field(g, 11, 0.4);
  for (auto& v : phi0.phys()) v += 0.2;
  VectorField u0 = random_solenoidal(g, 12, 0.4);

  SUBCASE("semi-implicit over many steps") {
    PhaseState s = PhaseState::create(p, phi0, u0);
    const double m0 = mean_value(s.phi());
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    RunResult res = run(s, p, cfg);
    CHECK(res.steps == 1000);
    CHECK(mean_value(s.phi()) == m0);
    CHECK(std::abs(m0 - 0.2) <= 1e-14);
  }

  SUBCASE("explicit stages preserve the mean too") {
    ModelParams thin = p;
    thin.mobility = CoefficientLaw::constant(0.02);
    thin.m_bar = 0.0;
    thin.finalize();
    PhaseState s = PhaseState::create(thin, phi0, u0);
    const double m0 = mean_value(s.phi());
    SolverConfig cfg;
    cfg.dt = 2e-4;
    cfg.t_end = 0.01;
    cfg.scheme = Scheme::ExplicitRK4;
    cfg.validate(g, thin);
    run(s, thin, cfg);
    CHECK(mean_value(s.phi()) == m0);
  }
}

TEST_CASE("identical runs are bitwise identical") {
  GridConfig gc;
  gc.n = {32, 32, 1};
  Grid g(gc);

  ModelParams p;
  p.eta = 0.7;
  p.viscosity = CoefficientLaw::bounded_smooth(0.4, 0.6, 0.1);
  p.mobility = CoefficientLaw::bounded_smooth(0.2, 0.3, 0.1);
  p.finalize();

  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.03;

  auto make = [&] {
    return PhaseState::create(p, random_smooth_field(g, 21, 0.5),
                              random_solenoidal(g, 22, 0.5));
  };
  PhaseState a = make();
  PhaseState b = make();
  run(a, p, cfg);
  run(b, p, cfg);

  CHECK(max_abs_diff(to_physical(a.phi()), to_physical(b.phi())) == 0.0);
  for (int ax = 0; ax < 2; ++ax)
    CHECK(max_abs_diff(to_physical(a.u())[ax], to_physical(b.u())[ax]) == 0.0);
  CHECK(a.t == b.t);
}

TEST_CASE("taylor-green vortex decays at the discrete viscous rate") {
  const double nu = 0.1;
  GridConfig gc;
  gc.n = {32, 32, 1};
  Grid g(gc);
  ModelParams p = constant_params(0.0, nu, 1.0);

  PhaseState s = PhaseState::create(
      p, Field::sample(g, [](std::array<double, 3>) { return 0.0; }),
      taylor_green(g, 1.3));
  const double n0 = lp_norm(s.u(), 2.0);

  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  RunResult res = run(s, p, cfg);

  // the projected convection term of the vortex is a pure gradient, so the
  // backward-Euler-damped mode contracts by exactly 1/(1+2 nu dt) per step
  const double per_step = 1.0 / (1.0 + 2.0 * nu * cfg.dt);
  const double discrete = std::pow(per_step, static_cast<double>(res.steps));
  const double n1 = lp_norm(s.u(), 2.0);
  CHECK(n1 / n0 == doctest::Approx(discrete).epsilon(1e-11));
  CHECK(n1 / n0 == doctest::Approx(std::exp(-2.0 * nu * 1.0)).epsilon(1e-4));
  // the phase never leaves zero, so no spurious coupling force appears
  CHECK(lp_norm(to_physical(s.phi()),
                std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("explicit scheme reproduces the viscous decay to high order") {
  const double nu = 0.1;
  GridConfig gc;
  gc.n = {16, 16, 1};
  Grid g(gc);
  ModelParams p = constant_params(0.0, nu, 1.0);

  PhaseState s = PhaseState::create(
      p, Field::sample(g, [](std::array<double, 3>) { return 0.0; }),
      taylor_green(g, 0.9));
  const double n0 = lp_norm(s.u(), 2.0);

  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.scheme = Scheme::ExplicitRK4;
  cfg.validate(g, p);
  run(s, p, cfg);

  CHECK(lp_norm(s.u(), 2.0) / n0 ==
        doctest::Approx(std::exp(-2.0 * nu * 0.5)).epsilon(1e-11));
}

TEST_CASE("one-dimensional phase profiles exert no net flow") {
  Grid g(GridConfig{});
  ModelParams p = constant_params(1.0, 1.0, 1.0);
  Field stripe = Field::sample(
      g, [](std::array<double, 3> x) { return 0.3 * std::cos(x[0]); });
  PhaseState s = PhaseState::create(p, stripe, VectorField(g, Repr::Physical));

  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  run(s, p, cfg);

  // the capillary force of an x-only profile is a pure gradient plus a
  // translation-invariance residual, both of which the projection removes
  CHECK(lp_norm(to_physical(s.u()),
                std::numeric_limits<double>::infinity()) <= 1e-11);
}

TEST_CASE("projected convection does no work on the velocity") {
  Grid g(GridConfig{});
  VectorField u = random_solenoidal(g, 31, 1.0);
  const int d = g.dim();
  auto gradu = velocity_gradient(u);
  const VectorField u_phys = to_physical(u);

  VectorField conv(g, Repr::Physical);
  for (int j = 0; j < d; ++j) {
    for (std::size_t q = 0; q < g.size(); ++q) {
      double acc = 0.0;
      for (int i = 0; i < d; ++i)
        acc += u_phys[i].phys()[q] * gradu[i * d + j].phys()[q];
      conv[j].phys()[q] = acc;
    }
  }
  const VectorField proj = leray_project(conv);
  const double scale = lp_norm(u, 2.0) * lp_norm(conv, 2.0);
  CHECK(std::abs(inner(proj, u)) <= 1e-10 * scale);
}

TEST_CASE("semi-implicit and explicit steps agree to first order") {
  GridConfig gc;
  gc.n = {32, 32, 1};
  Grid g(gc);
  ModelParams p = constant_params(0.5, 0.02, 0.02);

  Field phi0 = random_smooth_field(g, 41, 0.3);
  VectorField u0 = random_solenoidal(g, 42, 0.2);

  auto advance = [&](Scheme scheme, double dt) {
    PhaseState s = PhaseState::create(p, phi0, u0);
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.016;
    cfg.scheme = scheme;
    cfg.validate(g, p);
    run(s, p, cfg);
    return s;
  };

  auto diff_at = [&](double dt) {
    PhaseState a = advance(Scheme::SemiImplicitEuler, dt);
    PhaseState b = advance(Scheme::ExplicitRK4, dt);
    Field d = to_physical(a.phi());
    axpy(-1.0, to_physical(b.phi()), d);
    return lp_norm(d, 2.0);
  };

  const double coarse = diff_at(4e-4);
  const double fine = diff_at(2e-4);
  CHECK(coarse > 1e-12);  // the gap is a genuine first-order signal
  CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("total energy decreases along unforced trajectories") {
  GridConfig gc;
  gc.n = {32, 32, 1};
  Grid g(gc);
  ModelParams p = constant_params(1.0, 1.0, 1.0);

  PhaseState s = PhaseState::create(p, random_smooth_field(g, 51, 0.4),
                                    random_solenoidal(g, 52, 0.3));
  const double e0 = total_energy(s, p);

  std::vector<double> energies{e0};
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.3;
  run(s, p, cfg, [&](const PhaseState& st, std::size_t) {
    energies.push_back(total_energy(st, p));
  });

  const double slack = 1e-8 * std::max(1.0, std::abs(e0));
  for (std::size_t i = 1; i < energies.size(); ++i)
    CHECK(energies[i] <= energies[i - 1] + slack);
  CHECK(energies.back() < e0);
}

TEST_CASE("runaway amplification halts with a named monitor") {
  Grid g(GridConfig{});
  ModelParams p = constant_params(-200.0, 1.0, 1.0);
  PhaseState s = PhaseState::create(p, random_smooth_field(g, 61, 0.6),
                                    VectorField(g, Repr::Physical));

  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 10.0;

  bool caught = false;
  try {
    run(s, p, cfg);
  } catch (const BlowUpError& e) {
    caught = true;
    CHECK(e.monitor == "max|phi|");
    CHECK(std::string(e.what()).find("blow-up detected") != std::string::npos);
  }
  CHECK(caught);
}

TEST_CASE("run clamps the final step onto the end time") {
  Grid g(GridConfig{});
  ModelParams p = constant_params(0.0, 1.0, 1.0);
  PhaseState s = PhaseState::create(
      p, Field::sample(g, [](std::array<double, 3>) { return 0.1; }),
      VectorField(g, Repr::Physical));

  SolverConfig cfg;
  cfg.dt = 0.3;
  cfg.t_end = 1.0;
  RunResult res = run(s, p, cfg);
  CHECK(res.steps == 4);
  CHECK(res.final_time == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.t == res.final_time);
}

}  // TEST_SUITE
