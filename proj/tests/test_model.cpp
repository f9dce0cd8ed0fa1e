#include <doctest.h>

#include <cmath>

#include "fchflow/errors.hpp"
#include "fchflow/model.hpp"
#include "test_util.hpp"

using namespace fchflow;
using namespace fchflow::testutil;

namespace {

Grid grid2d(int n) {
  GridConfig cfg;
  cfg.dim = 2;
  cfg.n = {n, n, 1};
  return Grid(cfg);
}

ModelParams params(double eta) {
  ModelParams p;
  p.eta = eta;
  p.finalize();
  return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("quartic well derivatives") {
  Potential pot;
  CHECK(pot.F(0.0) == doctest::Approx(0.25));
  CHECK(pot.F(1.0) == doctest::Approx(0.0));
  CHECK(pot.F(-1.0) == doctest::Approx(0.0));
  CHECK(pot.f(2.0, 0) == doctest::Approx(6.0));   // s^3 - s
  CHECK(pot.f(2.0, 1) == doctest::Approx(11.0));  // 3 s^2 - 1
  CHECK(pot.f(2.0, 2) == doctest::Approx(12.0));  // 6 s
  CHECK(pot.f(2.0, 3) == doctest::Approx(6.0));   // 6
  CHECK(pot.f(-0.3, 3) == doctest::Approx(6.0));
  CHECK_THROWS_AS(pot.f(0.0, 4), std::domain_error);
}

TEST_CASE("s f(s) - 2 F(s) equals s^4/2 - 1/2 pointwise") {
  Potential pot;
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const double s = 3.0 * sym_uniform(rng);
    const double lhs = s * pot.f(s, 0) - 2.0 * pot.F(s);
    const double rhs = 0.5 * s * s * s * s - 0.5;
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("general polynomial wells validate at construction") {
  // F(s) = s^6: f = 6 s^5, f' = 30 s^4, f'' = 120 s^3, f''' = 360 s^2
  Potential sextic({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0});
  CHECK(sextic.f(2.0, 0) == doctest::Approx(192.0));
  CHECK(sextic.f(2.0, 1) == doctest::Approx(480.0));
  CHECK(sextic.f(2.0, 2) == doctest::Approx(960.0));
  CHECK(sextic.f(2.0, 3) == doctest::Approx(1440.0));

  CHECK_THROWS_AS(Potential({0.0, 0.0, 0.0, 1.0}), ConfigError);   // odd degree
  CHECK_THROWS_AS(Potential({0.0, 0.0, -1.0}), ConfigError);       // negative lead
  CHECK_THROWS_AS(Potential({1.0}), ConfigError);                  // constant
}

TEST_CASE("coefficient laws evaluate per their formulas") {
  CoefficientLaw c = CoefficientLaw::constant(0.7);
  CHECK(c(3.0) == doctest::Approx(0.7));
  CHECK(c.min_value() == doctest::Approx(0.7));
  CHECK(c.deriv(1.0, 1) == 0.0);

  CoefficientLaw b = CoefficientLaw::bounded_smooth(1.0, 1.0, 0.5);
  CHECK(b(0.0) == doctest::Approx(1.5));
  CHECK(b(1.0) == doctest::Approx(2.0));
  CHECK(b.min_value() == doctest::Approx(1.5));
  // d/ds [s^2/(1+s^2)] = 2s/(1+s^2)^2
  CHECK(b.deriv(1.0, 1) == doctest::Approx(0.5));
  // d2/ds2 = (2 - 6 s^2)/(1+s^2)^3
  CHECK(b.deriv(1.0, 2) == doctest::Approx(-0.5));
  for (double s : {-10.0, -0.3, 0.0, 2.0, 50.0}) CHECK(b(s) >= b.min_value());

  CHECK_THROWS_AS(CoefficientLaw::constant(0.0), ConfigError);
  CHECK_THROWS_AS(CoefficientLaw::constant(-1.0), ConfigError);
  // infimum base + floor + min(0, amplitude) = -0.2 is not positive
  CHECK_THROWS_AS(CoefficientLaw::bounded_smooth(1.0, -1.4, 0.2), ConfigError);
}

TEST_CASE("model params fill splitting constants from the laws") {
  ModelParams p;
  p.eta = -1.0;
  p.viscosity = CoefficientLaw::bounded_smooth(1.0, 1.0, 0.5);
  p.mobility = CoefficientLaw::constant(0.1);
  p.finalize();
  // sup of the viscosity law over [-1.5, 1.5]: 1.5 + 1.0 * 2.25/3.25
  CHECK(p.nu_bar == doctest::Approx(1.5 + 2.25 / 3.25).epsilon(1e-3));
  CHECK(p.m_bar == doctest::Approx(0.1));

  ModelParams bad = p;
  bad.m_bar = 0.05;  // below the mobility floor
  CHECK_THROWS_AS(bad.finalize(), ConfigError);
}

TEST_CASE("constant states produce the closed-form omega and mu") {
  Grid g = grid2d(32);
  ModelParams p = params(0.5);
  const double c = 0.5;
  Field phi = Field::sample(g, [&](const std::array<double, 3>&) { return c; });
  Field om = compute_omega(phi, p);
  Field mu = compute_mu(phi, p);
  const double f_c = c * c * c - c;                    // -0.375
  const double mu_c = (3 * c * c - 1 + p.eta) * f_c;   // (f'(c)+eta) f(c)
  for (double v : om.phys()) CHECK(std::abs(v - f_c) <= 1e-15);
  for (double v : mu.phys()) CHECK(std::abs(v - mu_c) <= 1e-14);
}

TEST_CASE("omega and mu linearize correctly around zero") {
  Grid g = grid2d(32);
  ModelParams p = params(0.5);
  const double eps = 1e-4;
  Field phi = Field::sample(g, [&](const std::array<double, 3>& x) {
    return eps * std::cos(2.0 * x[0]);
  });
  // omega ~ (k^2 - 1) eps cos(kx), mu ~ (k^2 - 1 + eta)(k^2 - 1) eps cos(kx)
  Field om = compute_omega(phi, p);
  Field mu = compute_mu(phi, p);
  Field om_want = Field::sample(g, [&](const std::array<double, 3>& x) {
    return 3.0 * eps * std::cos(2.0 * x[0]);
  });
  Field mu_want = Field::sample(g, [&](const std::array<double, 3>& x) {
    return (3.0 + p.eta) * 3.0 * eps * std::cos(2.0 * x[0]);
  });
  CHECK(max_abs_diff(om, om_want) <= 1e-10);
  CHECK(max_abs_diff(mu, mu_want) <= 1e-9);
}

TEST_CASE("energy of reference states matches closed forms") {
  Grid g = grid2d(32);
  // phi = 0: E = eta * F(0) * |box| = eta * pi^2 for eta = 1
  Field zero(g, Repr::Physical);
  CHECK(rel_err(energy_E(zero, params(1.0)), kTwoPi * kTwoPi / 4.0) < 1e-13);
  // phi = 1: omega = 0, F(1) = 0, so E = 0 for any eta
  Field one = Field::sample(g, [](const std::array<double, 3>&) { return 1.0; });
  CHECK(std::abs(energy_E(one, params(-0.7))) <= 1e-13);
}

TEST_CASE("total energy adds kinetic and phase contributions") {
  Grid g = grid2d(32);
  ModelParams p = params(1.0);
  VectorField u = VectorField::sample(g, [](const std::array<double, 3>& x) {
    return std::array<double, 3>{std::sin(x[0]) * std::cos(x[1]),
                                 -std::cos(x[0]) * std::sin(x[1]), 0.0};
  });
  PhaseState s = PhaseState::create(p, Field(g, Repr::Physical), u);
  // kinetic = |box|/4 = pi^2, elastic = pi^2
  CHECK(rel_err(kinetic_energy(s.u()), kTwoPi * kTwoPi / 4.0) < 1e-12);
  CHECK(rel_err(total_energy(s, p), 2.0 * kTwoPi * kTwoPi / 4.0) < 1e-12);
}

TEST_CASE("dissipation of the taylor-green vortex matches 4 nu A^2 pi^2") {
  Grid g = grid2d(64);
  ModelParams p;
  p.eta = 1.0;
  p.viscosity = CoefficientLaw::constant(0.3);
  p.finalize();
  const double amp = 1.7;
  VectorField u = VectorField::sample(g, [&](const std::array<double, 3>& x) {
    return std::array<double, 3>{amp * std::sin(x[0]) * std::cos(x[1]),
                                 -amp * std::cos(x[0]) * std::sin(x[1]), 0.0};
  });
  Field one = Field::sample(g, [](const std::array<double, 3>&) { return 1.0; });
  PhaseState s = PhaseState::create(p, one, u);
  const double pi = kTwoPi / 2.0;
  CHECK(rel_err(dissipation(s, p), 4.0 * 0.3 * amp * amp * pi * pi) < 1e-11);

  // rest state dissipates nothing
  PhaseState rest = PhaseState::create(p, one, VectorField(g, Repr::Physical));
  CHECK(std::abs(dissipation(rest, p)) <= 1e-13);
}

TEST_CASE("dissipation dominates its floor-coefficient lower bound") {
  Grid g = grid2d(64);
  ModelParams p;
  p.eta = -0.5;
  p.viscosity = CoefficientLaw::bounded_smooth(0.5, 1.0, 0.25);
  p.mobility = CoefficientLaw::bounded_smooth(0.2, 0.3, 0.1);
  p.finalize();
  PhaseState s = PhaseState::create(p, random_smooth_field(g, 7, 0.8),
                                    random_solenoidal(g, 8, 1.2));
  // D >= 2 nu_* ||Du||^2 + m_* ||grad mu||^2 pointwise, so also integrated
  const auto gradu = velocity_gradient(s.u());
  double du2 = 0.0;
  const int d = 2;
  std::vector<double> buf(g.size(), 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double dij = 0.5 * (gradu[i * d + j].phys()[q] + gradu[j * d + i].phys()[q]);
        buf[q] += dij * dij;
      }
  for (std::size_t q = 0; q < g.size(); ++q) du2 += buf[q];
  du2 *= g.volume() / g.size();
  VectorField gmu = grad(to_spectral(s.mu()));
  const double gmu2 = std::pow(lp_norm(gmu, 2.0), 2);
  const double lower =
      2.0 * p.viscosity.min_value() * du2 + p.mobility.min_value() * gmu2;
  CHECK(dissipation(s, p) >= lower * (1.0 - 1e-12));
}

TEST_CASE("korteweg force vanishes for constant phi and obeys the duality") {
  Grid g = grid2d(64);
  ModelParams p = params(-1.0);
  Field one = Field::sample(g, [](const std::array<double, 3>&) { return 1.0; });
  PhaseState flat = PhaseState::create(p, one, VectorField(g, Repr::Physical));
  CHECK(lp_norm(korteweg_force(flat, p), std::numeric_limits<double>::infinity()) <=
        1e-13);

  // energy exchange: <mu grad(phi), u> - <u . grad(phi), mu> = 0
  PhaseState s = PhaseState::create(p, random_smooth_field(g, 17, 0.6),
                                    random_solenoidal(g, 18, 1.0));
  VectorField force = korteweg_force(s, p);
  const double work_u = inner(to_physical(force), to_physical(s.u()));
  VectorField gphi = to_physical(grad(s.phi()));
  Field conv(g, Repr::Physical);
  const VectorField uphys = to_physical(s.u());
  for (std::size_t q = 0; q < g.size(); ++q)
    conv.phys()[q] = uphys[0].phys()[q] * gphi[0].phys()[q] +
                     uphys[1].phys()[q] * gphi[1].phys()[q];
  const double work_phi = inner(conv, s.mu());
  CHECK(std::abs(work_u - work_phi) <=
        1e-10 * std::max({1.0, std::abs(work_u), std::abs(work_phi)}));
}

TEST_CASE("chemical potential is the discrete gradient of the energy") {
  Grid g = grid2d(48);
  ModelParams p = params(-0.8);
  Field phi = random_smooth_field(g, 23, 0.7);
  Field psi = random_smooth_field(g, 24, 1.0);
  Field mu = compute_mu(phi, p);
  const double eps = 1e-5;
  Field plus = phi, minus = phi;
  axpy(eps, psi, plus);
  axpy(-eps, psi, minus);
  const double fd = (energy_E(plus, p) - energy_E(minus, p)) / (2.0 * eps);
  const double pairing = inner(mu, psi);
  CHECK(rel_err(fd, pairing) < 1e-6);
}

TEST_CASE("caches are recomputed explicitly and equal the operations bitwise") {
  Grid g = grid2d(32);
  ModelParams p = params(0.3);
  PhaseState s = PhaseState::create(p, random_smooth_field(g, 31, 0.5),
                                    random_solenoidal(g, 32, 0.4));
  CHECK(s.caches_valid());
  CHECK(s.omega().phys() == compute_omega(s.phi(), p).phys());
  CHECK(s.mu().phys() == compute_mu(s.phi(), p).phys());

  PhaseState mod = s;
  mod.set_phi(random_smooth_field(g, 33, 0.5));
  CHECK_FALSE(mod.caches_valid());
  CHECK_THROWS_AS(mod.omega(), std::logic_error);
  mod.refresh_caches(p);
  CHECK(mod.caches_valid());
  CHECK(mod.omega().phys() == compute_omega(mod.phi(), p).phys());
}

TEST_CASE("created states are solenoidal") {
  Grid g = grid2d(64);
  ModelParams p = params(0.0);
  PhaseState s = PhaseState::create(p, random_smooth_field(g, 41, 0.5),
                                    random_smooth_vector(g, 42, 1.0));
  CHECK(lp_norm(divergence(s.u()), std::numeric_limits<double>::infinity()) <=
        1e-11);
}

TEST_CASE("viscosity and mobility evaluations respect their floors") {
  ModelParams p;
  p.eta = 0.0;
  p.viscosity = CoefficientLaw::bounded_smooth(0.4, 2.0, 0.1);
  p.mobility = CoefficientLaw::constant(0.25);
  p.finalize();
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const double s = 5.0 * sym_uniform(rng);
    CHECK(viscosity_eval(p, s) >= p.viscosity.min_value());
    CHECK(mobility_eval(p, s) == doctest::Approx(0.25));
  }
}

}  // TEST_SUITE
