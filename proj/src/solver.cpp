#include "fchflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fchflow/errors.hpp"
#include "fchflow/spectral.hpp"

namespace fchflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// [+ g_u], projected
VectorField velocity_tendency(const PhaseState& s, const ModelParams& p,
                              const ForcingSpec& forcing) {
  VectorField du = momentum_flux(s, p);
  if (forcing.g_u) {
    const VectorField gu = dealias(to_spectral(forcing.g_u(s.t)));
    for (int j = 0; j < du.dim(); ++j) axpy(1.0, gu[j], du[j]);
  }
  return leray_project(du);
}

// -u . grad(phi) + div(m(phi) grad(mu)) [+ g_phi], mean removed
Field phase_tendency(const PhaseState& s, const ModelParams& p,
                     const ForcingSpec& forcing) {
  const Grid& g = s.phi().grid();
  const int d = g.dim();
  const VectorField u_phys = to_physical(s.u());
  const Field phi_phys = to_physical(s.phi());
  const VectorField gphi = to_physical(grad(s.phi()));
  const VectorField gmu = to_physical(grad(to_spectral(s.mu())));
  const Field m = mobility_field(p, phi_phys);

  Field advect(g, Repr::Physical);
  for (std::size_t q = 0; q < g.size(); ++q) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a)
      acc += u_phys[a].phys()[q] * gphi[a].phys()[q];
    advect.phys()[q] = -acc;
  }
  if (forcing.g_phi) axpy(1.0, forcing.g_phi(s.t), advect);

  VectorField flux(g, Repr::Physical);
  for (int a = 0; a < d; ++a) flux[a] = multiply(m, gmu[a]);

  Field dphi = to_spectral(advect);
  axpy(1.0, divergence(to_spectral(flux)), dphi);
  dphi = dealias(dphi);
  dphi.spec()[0] = 0.0;  // the phase mean is a conserved quantity
  return dphi;
}

Field sie_phase(const PhaseState& s, const ModelParams& p, const Field& dphi,
                double dt) {
  Field out = s.phi();
  const Grid& g = out.grid();
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const double k2 = g.k2_at(i0, i1, i2);
    const double damp = 1.0 + dt * p.m_bar * k2 * k2 * k2;
    out.spec()[flat] += dt * dphi.spec()[flat] / damp;
  });
  return out;
}

VectorField sie_velocity(const PhaseState& s, const ModelParams& p,
                         const VectorField& du, double dt) {
  VectorField out = s.u();
  const Grid& g = out.grid();
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const double damp = 1.0 + dt * p.nu_bar * g.k2_at(i0, i1, i2);
    for (int a = 0; a < g.dim(); ++a)
      out[a].spec()[flat] += dt * du[a].spec()[flat] / damp;
  });
  return out;
}

PhaseState stage_state(const PhaseState& base, const ModelParams& p,
                       Field phi, VectorField u, double t) {
  PhaseState s = base;
  s.set_phi(std::move(phi));
  s.set_u(std::move(u));
  s.t = t;
  s.refresh_caches(p);
  return s;
}

void step_rk4(PhaseState& s, const ModelParams& p, const ForcingSpec& forcing,
              double dt) {
  const Field phi0 = s.phi();
  const VectorField u0 = s.u();
  const double t0 = s.t;

  auto shifted = [&](const Tendency& k, double c) {
    Field phi = phi0;
    axpy(c * dt, k.dphi, phi);
    VectorField u = u0;
    for (int a = 0; a < u.dim(); ++a) axpy(c * dt, k.du[a], u[a]);
    return stage_state(s, p, std::move(phi), std::move(u), t0 + c * dt);
  };

  const Tendency k1 = compute_tendency(s, p, forcing);
  const Tendency k2 = compute_tendency(shifted(k1, 0.5), p, forcing);
  const Tendency k3 = compute_tendency(shifted(k2, 0.5), p, forcing);
  const Tendency k4 = compute_tendency(shifted(k3, 1.0), p, forcing);

  Field phi = phi0;
  axpy(dt / 6.0, k1.dphi, phi);
  axpy(dt / 3.0, k2.dphi, phi);
  axpy(dt / 3.0, k3.dphi, phi);
  axpy(dt / 6.0, k4.dphi, phi);
  VectorField u = u0;
  for (int a = 0; a < u.dim(); ++a) {
    axpy(dt / 6.0, k1.du[a], u[a]);
    axpy(dt / 3.0, k2.du[a], u[a]);
    axpy(dt / 3.0, k3.du[a], u[a]);
    axpy(dt / 6.0, k4.du[a], u[a]);
  }

  s.set_phi(std::move(phi));
  s.set_u(std::move(u));
  s.t = t0 + dt;
  s.refresh_caches(p);
}

void check_bounded(const PhaseState& s) {
  const double phimax = lp_norm(to_physical(s.phi()), kInf);
  if (!(phimax <= 1e12)) throw BlowUpError(s.t, "max|phi|");
  const double umax = lp_norm(to_physical(s.u()), kInf);
  if (!(umax <= 1e12)) throw BlowUpError(s.t, "max|u|");
}

}  // namespace

void SolverConfig::validate(const Grid& g, const ModelParams& p) const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ConfigError("solver.dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw ConfigError("solver.t_end must be non-negative");
  if (!(cfl_safety > 0.0) || !(cfl_safety <= 1.0))
    throw ConfigError("solver.cfl_safety must lie in (0, 1]");
  if (scheme == Scheme::ExplicitRK4) {
    const double ceiling = cfl_safety * rk4_stiffness_dt(g, p);
    if (dt > ceiling)
      throw ConfigError("solver.dt exceeds the explicit stability ceiling " +
                        std::to_string(ceiling));
  }
}

double rk4_stiffness_dt(const Grid& g, const ModelParams& p) {
  const double kmax = g.max_retained_wavenumber();
  const double k2 = kmax * kmax;
  return 2.78 / (p.m_bar * k2 * k2 * k2 + p.nu_bar * k2);
}

double stable_dt(const PhaseState& s, const SolverConfig& cfg) {
  const Grid& g = s.u().grid();
  double dx = kInf;
  for (int a = 0; a < g.dim(); ++a) dx = std::min(dx, g.dx(a));
  const double umax = lp_norm(to_physical(s.u()), kInf);
  if (umax < 1e-300) return 1e300;
  return cfg.cfl_safety * dx / umax;
}

Tendency compute_tendency(const PhaseState& s, const ModelParams& p,
                          const ForcingSpec& forcing) {
  return Tendency{phase_tendency(s, p, forcing),
                  velocity_tendency(s, p, forcing)};
}

VectorField momentum_flux(const PhaseState& s, const ModelParams& p) {
  const Grid& g = s.u().grid();
  const int d = g.dim();
  const VectorField u_phys = to_physical(s.u());
  const Field phi_phys = to_physical(s.phi());
  const auto gradu = velocity_gradient(s.u());
  const Field nu = viscosity_field(p, phi_phys);
  const VectorField gphi = to_physical(grad(s.phi()));

  VectorField explicit_part(g, Repr::Physical);
  for (int j = 0; j < d; ++j) {
    auto& out = explicit_part[j].phys();
    for (std::size_t q = 0; q < g.size(); ++q) {
      double conv = 0.0;
      for (int i = 0; i < d; ++i)
        conv += u_phys[i].phys()[q] * gradu[i * d + j].phys()[q];
      out[q] = -conv + s.mu().phys()[q] * gphi[j].phys()[q];
    }
  }

  VectorField du = to_spectral(explicit_part);

  // stress divergence (div T)_j = sum_i d_i (2 nu D_ij)
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Field t_ij(g, Repr::Physical);
      for (std::size_t q = 0; q < g.size(); ++q)
        t_ij.phys()[q] = nu.phys()[q] * (gradu[i * d + j].phys()[q] +
                                         gradu[j * d + i].phys()[q]);
      Field t_hat = to_spectral(t_ij);
      for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
        const int idx[3] = {i0, i1, i2};
        const std::complex<double> ik(0.0, g.deriv_wavenumber(i, idx[i]));
        du[j].spec()[flat] += ik * t_hat.spec()[flat];
      });
    }

  return dealias(du);
}

Field step_phase(const PhaseState& s, const ModelParams& p,
                 const ForcingSpec& forcing, double dt) {
  return sie_phase(s, p, phase_tendency(s, p, forcing), dt);
}

VectorField step_velocity(const PhaseState& s, const ModelParams& p,
                          const ForcingSpec& forcing, double dt) {
  return sie_velocity(s, p, velocity_tendency(s, p, forcing), dt);
}

void step(PhaseState& s, const ModelParams& p, const SolverConfig& cfg,
          double dt) {
  if (cfg.scheme == Scheme::ExplicitRK4) {
    step_rk4(s, p, cfg.forcing, dt);
    return;
  }
  const Tendency k = compute_tendency(s, p, cfg.forcing);
  Field phi = sie_phase(s, p, k.dphi, dt);
  VectorField u = sie_velocity(s, p, k.du, dt);
  s.set_phi(std::move(phi));
  s.set_u(std::move(u));
  s.t += dt;
  s.refresh_caches(p);
}

RunResult run(PhaseState& s, const ModelParams& p, const SolverConfig& cfg,
              const std::function<void(const PhaseState&, std::size_t)>&
                  observer) {
  cfg.validate(s.phi().grid(), p);
  RunResult res;
  const double tiny = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
  while (s.t < cfg.t_end - tiny) {
    const double dt_eff =
        std::min({cfg.dt, stable_dt(s, cfg), cfg.t_end - s.t});
    step(s, p, cfg, dt_eff);
    check_bounded(s);
    ++res.steps;
    if (observer) observer(s, res.steps);
  }
  res.final_time = s.t;
  return res;
}

}  // namespace fchflow
