#include "fchflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "fchflow/errors.hpp"
#include "fchflow/spectral.hpp"

namespace fchflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double x, int q) {
  double acc = 1.0;
  for (int i = 0; i < q; ++i) acc *= x;
  return acc;
}

// L^p norm of the pointwise Frobenius magnitude of grad u
double gradu_lp(const Grid& g, const std::vector<Field>& gradu, double p) {
  const std::size_t n = g.size();
  const double w = g.volume() / static_cast<double>(n);
  double acc = 0.0;
  double worst = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    double m2 = 0.0;
    for (const auto& comp : gradu) {
      const double v = comp.phys()[q];
      m2 += v * v;
    }
    if (p == kInf) {
      worst = std::max(worst, m2);
    } else {
      acc += std::pow(m2, 0.5 * p);
    }
  }
  if (p == kInf) return std::sqrt(worst);
  return std::pow(w * acc, 1.0 / p);
}

// ||grad u||^2 via Parseval on the spectral coefficients
double grad_u_sq_spectral(const VectorField& u_hat) {
  const Grid& g = u_hat.grid();
  double acc = 0.0;
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const double k2 = g.k2_at(i0, i1, i2);
    for (int a = 0; a < g.dim(); ++a)
      acc += k2 * std::norm(u_hat[a].spec()[flat]);
  });
  return g.volume() * acc;
}

struct MonitorCheck {
  const char* name;
  double value;
};

}  // namespace

SerrinSample serrin_norms(const PhaseState& s) {
  const VectorField u_phys = to_physical(s.u());
  const auto gradu = velocity_gradient(s.u());
  const Grid& g = s.u().grid();
  SerrinSample out;
  out.u_l4 = lp_norm(u_phys, 4.0);
  out.u_l6 = lp_norm(u_phys, 6.0);
  out.u_linf = lp_norm(u_phys, kInf);
  out.gradu_l2 = gradu_lp(g, gradu, 2.0);
  out.gradu_l3 = gradu_lp(g, gradu, 3.0);
  out.gradu_l6 = gradu_lp(g, gradu, 6.0);
  return out;
}

double h_a_sample(const PhaseState& s) {
  const double u4 = lp_norm(to_physical(s.u()), 4.0);
  const double gu = std::sqrt(grad_u_sq_spectral(s.u()));
  const double mu_h1 = sobolev_norm(s.mu(), 1);
  const double phi_h3 = sobolev_norm(s.phi(), 3);
  return 1.0 + ipow(u4, 8) + gu * gu + mu_h1 * mu_h1 + 2.0 * phi_h3 * phi_h3;
}

double h_a_pair(const PhaseState& a, const PhaseState& b) {
  const double u4 = lp_norm(to_physical(a.u()), 4.0);
  const double gu = std::sqrt(grad_u_sq_spectral(b.u()));
  const double mu_h1 = sobolev_norm(b.mu(), 1);
  const double phi1_h3 = sobolev_norm(a.phi(), 3);
  const double phi2_h3 = sobolev_norm(b.phi(), 3);
  return 1.0 + ipow(u4, 8) + gu * gu + mu_h1 * mu_h1 + phi1_h3 * phi1_h3 +
         phi2_h3 * phi2_h3;
}

LambdaResult lambda_functional(const PhaseState& s, const ModelParams& p,
                               double gamma) {
  const Grid& g = s.phi().grid();
  const int d = g.dim();
  const std::size_t n = g.size();
  const double w = g.volume() / static_cast<double>(n);

  LambdaResult res;
  res.grad_u_sq = grad_u_sq_spectral(s.u());

  const Field phi_phys = to_physical(s.phi());
  const Field m = mobility_field(p, phi_phys);
  const VectorField gmu = to_physical(grad(to_spectral(s.mu())));
  const VectorField gphi = to_physical(grad(s.phi()));
  const VectorField u_phys = to_physical(s.u());

  double gmu2 = 0.0, wgmu = 0.0, cross = 0.0;
  double m_star = kInf, m_sup = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    double g2 = 0.0;
    double adv = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = gmu[a].phys()[q];
      g2 += x * x;
      adv += u_phys[a].phys()[q] * gphi[a].phys()[q];
    }
    const double mq = m.phys()[q];
    gmu2 += g2;
    wgmu += mq * g2;
    cross += adv * s.mu().phys()[q];
    m_star = std::min(m_star, mq);
    m_sup = std::max(m_sup, mq);
  }
  res.grad_mu_sq = w * gmu2;
  res.weighted_grad_mu = w * wgmu;
  res.cross = w * cross;

  res.lambda = 0.5 * res.grad_u_sq + 0.5 * gamma * res.weighted_grad_mu +
               gamma * res.cross;
  res.lower = 0.25 * res.grad_u_sq + gamma * m_star / 4.0 * res.grad_mu_sq;
  res.upper = res.grad_u_sq + gamma * m_sup * res.grad_mu_sq;

  const double quad = 0.5 * res.grad_u_sq + 0.5 * gamma * res.weighted_grad_mu;
  res.cross_small = std::abs(gamma * res.cross) <= 0.5 * quad;
  if (res.cross_small) {
    const double tol = 1e-12 * std::max(1.0, std::abs(res.lambda));
    res.bounds_ok =
        res.lambda >= res.lower - tol && res.lambda <= res.upper + tol;
  } else {
    res.bounds_ok = true;  // the inequality is only claimed for small cross terms
  }
  return res;
}

DiagnosticsCollector::DiagnosticsCollector(const ModelParams& p,
                                           DiagnosticsOptions opt)
    : params_(p), opt_(opt) {
  if (opt_.scalar_every < 1 || opt_.lp_every < 1)
    throw ConfigError("diagnostics cadences must be positive");
  if (!(opt_.gamma >= 0.0))
    throw ConfigError("diagnostics gamma must be non-negative");
}

std::optional<DiagnosticsRecord> DiagnosticsCollector::observe(
    const PhaseState& s) {
  // advance the running integrals over (prev_t, t] holding the last norms
  if (acc_.has_prev) {
    const double dt = s.t - acc_.prev_t;
    if (dt > 0.0) {
      acc_.int_u_l4_q8 += dt * ipow(acc_.cached.u_l4, 8);
      acc_.int_u_l6_q4 += dt * ipow(acc_.cached.u_l6, 4);
      acc_.int_u_linf_q2 += dt * ipow(acc_.cached.u_linf, 2);
      acc_.int_gradu_l2_q4 += dt * ipow(acc_.cached.gradu_l2, 4);
      acc_.int_gradu_l3_q2 += dt * ipow(acc_.cached.gradu_l3, 2);
      acc_.h_a_integral += dt * acc_.h_a_cached;
    }
  }

  if (acc_.observations % static_cast<std::size_t>(opt_.lp_every) == 0) {
    acc_.cached = serrin_norms(s);
    acc_.h_a_cached = h_a_sample(s);
    const MonitorCheck monitors[] = {
        {"u_l4", acc_.cached.u_l4},         {"u_l6", acc_.cached.u_l6},
        {"u_linf", acc_.cached.u_linf},     {"gradu_l2", acc_.cached.gradu_l2},
        {"gradu_l3", acc_.cached.gradu_l3}, {"gradu_l6", acc_.cached.gradu_l6},
    };
    for (const auto& m : monitors)
      if (!(m.value <= 1e12)) throw BlowUpError(s.t, m.name);
  }

  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = integral(to_physical(s.phi()));
  r.kinetic = kinetic_energy(s.u());
  r.elastic = energy_E(s.phi(), params_);
  r.total = r.kinetic + r.elastic;
  r.dissipation = dissipation(s, params_);
  if (acc_.has_prev && s.t > acc_.prev_t)
    r.energy_residual =
        (r.total - acc_.prev_total) / (s.t - acc_.prev_t) + r.dissipation;
  r.mu_mean = integral(s.mu());
  r.norms = acc_.cached;
  r.int_u_l4_q8 = acc_.int_u_l4_q8;
  r.int_u_l6_q4 = acc_.int_u_l6_q4;
  r.int_u_linf_q2 = acc_.int_u_linf_q2;
  r.int_gradu_l2_q4 = acc_.int_gradu_l2_q4;
  r.int_gradu_l3_q2 = acc_.int_gradu_l3_q2;
  r.lambda = lambda_functional(s, params_, opt_.gamma).lambda;
  r.h_a_integral = acc_.h_a_integral;

  acc_.prev_total = r.total;
  acc_.prev_t = s.t;
  acc_.has_prev = true;
  const bool emit =
      acc_.observations % static_cast<std::size_t>(opt_.scalar_every) == 0;
  ++acc_.observations;
  if (!emit) return std::nullopt;
  return r;
}

namespace {

double twin_distance(const PhaseState& a, const PhaseState& b) {
  Field dphi = a.phi();
  axpy(-1.0, b.phi(), dphi);
  const double lap = lp_norm(laplacian(dphi), 2.0);
  VectorField du = a.u();
  for (int c = 0; c < du.dim(); ++c) axpy(-1.0, b.u()[c], du[c]);
  const double un = lp_norm(du, 2.0);
  return 0.5 * un * un + 0.5 * lap * lap;
}

}  // namespace

TwinResult twin_run(PhaseState s1, PhaseState s2, const ModelParams& p,
                    const SolverConfig& cfg, const TwinOptions& opt) {
  if (!s1.phi().grid().compatible_with(s2.phi().grid()))
    throw ConfigError("twin states live on different grids");
  if (!(opt.fit_window_fraction > 0.0) || !(opt.fit_window_fraction < 1.0))
    throw ConfigError("twin fit window fraction must lie in (0, 1)");
  if (opt.sample_every < 1)
    throw ConfigError("twin sample cadence must be positive");
  cfg.validate(s1.phi().grid(), p);

  TwinResult res;
  std::vector<double> xs;  // running integral of h_a at each sample

  double last_ha = h_a_pair(s1, s2);
  double last_t = s1.t;
  double x = 0.0;
  res.records.push_back(TwinRecord{s1.t, twin_distance(s1, s2), last_ha, 0.0});
  xs.push_back(0.0);

  const double t0 = s1.t;
  const double tiny = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
  std::size_t n = 0;
  while (s1.t < cfg.t_end - tiny) {
    SolverConfig step_cfg = cfg;
    const double dt_eff = std::min({cfg.dt, stable_dt(s1, cfg),
                                    stable_dt(s2, cfg), cfg.t_end - s1.t});
    step(s1, p, step_cfg, dt_eff);
    step(s2, p, step_cfg, dt_eff);
    ++n;
    const bool last = !(s1.t < cfg.t_end - tiny);
    if (n % static_cast<std::size_t>(opt.sample_every) == 0 || last) {
      x += (s1.t - last_t) * last_ha;  // left endpoint rule
      last_ha = h_a_pair(s1, s2);
      last_t = s1.t;
      res.records.push_back(
          TwinRecord{s1.t, twin_distance(s1, s2), last_ha, 0.0});
      xs.push_back(x);
    }
  }

  // fit log(H/H0) = C * int h_a over the initial window, clamped so the
  // envelope never dips below H(0)
  const double h0 = res.records.front().H;
  const double window_end = t0 + opt.fit_window_fraction * (cfg.t_end - t0);
  if (h0 > 0.0) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 1; i < res.records.size(); ++i) {
      if (res.records[i].t > window_end) break;
      if (!(res.records[i].H > 0.0)) continue;
      const double y = std::log(res.records[i].H / h0);
      sxy += xs[i] * y;
      sxx += xs[i] * xs[i];
    }
    res.c_fit = sxx > 0.0 ? std::max(0.0, sxy / sxx) : 0.0;
  }

  res.first_violation_t = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    res.records[i].envelope = h0 * std::exp(res.c_fit * xs[i]);
    if (res.records[i].t > window_end &&
        res.records[i].H > res.records[i].envelope * (1.0 + 1e-12) &&
        !res.violated) {
      res.violated = true;
      res.first_violation_t = res.records[i].t;
    }
  }
  return res;
}

Field recover_pressure(const PhaseState& s, const ModelParams& p) {
  const VectorField flux = momentum_flux(s, p);
  const Grid& g = flux.grid();
  Field pr(g, Repr::Spectral);
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const double k2 = g.k2_at(i0, i1, i2);
    if (k2 == 0.0) return;
    const int idx[3] = {i0, i1, i2};
    std::complex<double> kdot(0.0, 0.0);
    for (int a = 0; a < g.dim(); ++a)
      kdot += g.deriv_wavenumber(a, idx[a]) * flux[a].spec()[flat];
    // -lap P = div(-flux)  =>  P_hat = -i (k . flux_hat)/|k|^2
    pr.spec()[flat] = std::complex<double>(0.0, -1.0) * kdot / k2;
  });
  return to_physical(pr);
}

}  // namespace fchflow
