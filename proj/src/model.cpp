#include "fchflow/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fchflow/errors.hpp"

namespace fchflow {

// ---------------------------------------------------------------- laws

CoefficientLaw::CoefficientLaw(Kind k, double base, double amp, double floor)
    : kind_(k), base_(base), amplitude_(amp), floor_(floor) {}

CoefficientLaw CoefficientLaw::constant(double c) {
  CoefficientLaw law(Kind::Constant, c, 0.0, 0.0);
  if (!(law.min_value() > 0.0))
    throw ConfigError("coefficient law must be strictly positive");
  return law;
}

CoefficientLaw CoefficientLaw::bounded_smooth(double base, double amplitude,
                                              double floor) {
  CoefficientLaw law(Kind::BoundedSmooth, base, amplitude, floor);
  if (!(law.min_value() > 0.0))
    throw ConfigError("coefficient law must be strictly positive");
  return law;
}

double CoefficientLaw::operator()(double s) const {
  if (kind_ == Kind::Constant) return base_;
  const double r = s * s / (1.0 + s * s);
  return base_ + amplitude_ * r + floor_;
}

double CoefficientLaw::deriv(double s, int order) const {
  if (order != 1 && order != 2)
    throw std::domain_error("coefficient law derivatives support order 1 or 2");
  if (kind_ == Kind::Constant) return 0.0;
  const double d = 1.0 + s * s;
  if (order == 1) return amplitude_ * 2.0 * s / (d * d);
  return amplitude_ * (2.0 - 6.0 * s * s) / (d * d * d);
}

double CoefficientLaw::min_value() const {
  if (kind_ == Kind::Constant) return base_;
  // s^2/(1+s^2) ranges over [0, 1)
  return base_ + floor_ + std::min(0.0, amplitude_);
}

double CoefficientLaw::max_over(double lo, double hi) const {
  double m = -std::numeric_limits<double>::infinity();
  const int samples = 301;
  for (int i = 0; i < samples; ++i) {
    const double s = lo + (hi - lo) * i / (samples - 1);
    m = std::max(m, (*this)(s));
  }
  return m;
}

// ----------------------------------------------------------- potential

Potential::Potential() : coef_{0.25, 0.0, -0.5, 0.0, 0.25} {}

Potential::Potential(std::vector<double> coef) : coef_(std::move(coef)) {
  while (!coef_.empty() && coef_.back() == 0.0) coef_.pop_back();
  const int degree = static_cast<int>(coef_.size()) - 1;
  if (degree < 2 || degree % 2 != 0)
    throw ConfigError("potential must have even leading degree >= 2");
  if (!(coef_.back() > 0.0))
    throw ConfigError("potential leading coefficient must be positive");
}

double Potential::F(double s) const {
  double acc = 0.0;
  for (std::size_t j = coef_.size(); j-- > 0;) acc = acc * s + coef_[j];
  return acc;
}

double Potential::f(double s, int order) const {
  if (order < 0 || order > 3)
    throw std::domain_error("f_eval supports derivative orders 0..3");
  const int d = order + 1;  // derivative order of F
  double acc = 0.0;
  for (int j = static_cast<int>(coef_.size()) - 1; j >= d; --j) {
    double w = coef_[j];
    for (int r = 0; r < d; ++r) w *= (j - r);
    acc = acc * s + w;
  }
  return acc;
}

double f_eval(const Potential& pot, double s, int order) { return pot.f(s, order); }

Field f_eval(const Potential& pot, const Field& phi, int order) {
  return apply(phi, [&](double s) { return pot.f(s, order); });
}

double potential_F(const Potential& pot, double s) { return pot.F(s); }

Field potential_F(const Potential& pot, const Field& phi) {
  return apply(phi, [&](double s) { return pot.F(s); });
}

// --------------------------------------------------------------- params

void ModelParams::finalize() {
  if (nu_bar <= 0.0)
    nu_bar = std::max(viscosity.min_value(), viscosity.max_over(-1.5, 1.5));
  if (m_bar <= 0.0)
    m_bar = std::max(mobility.min_value(), mobility.max_over(-1.5, 1.5));
  if (!(nu_bar >= viscosity.min_value()))
    throw BadValueError("model.nu_bar", "below the viscosity floor");
  if (!(m_bar >= mobility.min_value()))
    throw BadValueError("model.m_bar", "below the mobility floor");
  if (!std::isfinite(eta)) throw BadValueError("model.eta", "not finite");
}

// ---------------------------------------------------------------- state

const Field& PhaseState::omega() const {
  if (!caches_valid_) throw std::logic_error("phase state caches are stale");
  return omega_;
}

const Field& PhaseState::mu() const {
  if (!caches_valid_) throw std::logic_error("phase state caches are stale");
  return mu_;
}

void PhaseState::set_phi(Field phi) {
  phi_ = dealias(to_spectral(phi));
  caches_valid_ = false;
}

void PhaseState::set_u(VectorField u) {
  u_ = dealias(to_spectral(u));
  const double umax = lp_norm(u_, std::numeric_limits<double>::infinity());
  const double div =
      lp_norm(divergence(u_), std::numeric_limits<double>::infinity());
  if (div > 1e-11 * std::max(1.0, umax))
    throw ConfigError("velocity is not solenoidal");
  caches_valid_ = false;
}

void PhaseState::refresh_caches(const ModelParams& p) {
  omega_ = compute_omega(phi_, p);
  mu_ = compute_mu(phi_, p);
  caches_valid_ = true;
}

PhaseState PhaseState::create(const ModelParams& p, const Field& phi0,
                              const VectorField& u0, double t0) {
  PhaseState s;
  s.t = t0;
  s.set_phi(phi0);
  s.set_u(leray_project(u0));
  s.refresh_caches(p);
  return s;
}

// ------------------------------------------------------------ operators

Field compute_omega(const Field& phi, const ModelParams& p) {
  const Field phi_hat = to_spectral(phi);
  const Field phi_phys = to_physical(phi_hat);
  Field hat = laplacian(phi_hat);
  for (auto& c : hat.spec()) c = -c;
  Field fphi = to_spectral(f_eval(p.potential, phi_phys, 0));
  axpy(1.0, fphi, hat);
  return to_physical(dealias(hat));
}

Field compute_mu(const Field& phi, const ModelParams& p) {
  const Field phi_phys = to_physical(phi);
  const Field omega = compute_omega(phi, p);
  const Field omega_hat = to_spectral(omega);
  Field hat = laplacian(omega_hat);
  for (auto& c : hat.spec()) c = -c;
  Field reaction = multiply(f_eval(p.potential, phi_phys, 1), omega);
  axpy(1.0, to_spectral(reaction), hat);
  axpy(p.eta, omega_hat, hat);
  return to_physical(dealias(hat));
}

double energy_E(const Field& phi, const ModelParams& p) {
  const Grid& g = phi.grid();
  const Field phi_hat = to_spectral(phi);
  const Field phi_phys = to_physical(phi_hat);
  Field neg_lap = laplacian(phi_hat);
  for (auto& c : neg_lap.spec()) c = -c;
  const Field w_lin = to_physical(neg_lap);
  const VectorField gphi = to_physical(grad(phi_hat));
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = phi_phys.phys()[i];
    const double w = w_lin.phys()[i] + p.potential.f(s, 0);
    double g2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double x = gphi[a].phys()[i];
      g2 += x * x;
    }
    acc += 0.5 * w * w + p.eta * (0.5 * g2 + p.potential.F(s));
  }
  const double e = acc * g.volume() / static_cast<double>(g.size());
  if (!std::isfinite(e)) throw NumericalError("phase energy overflowed");
  return e;
}

double kinetic_energy(const VectorField& u) {
  const double n = lp_norm(u, 2.0);
  return 0.5 * n * n;
}

double total_energy(const PhaseState& s, const ModelParams& p) {
  const double e = kinetic_energy(s.u()) + energy_E(s.phi(), p);
  if (!std::isfinite(e)) throw NumericalError("total energy overflowed");
  return e;
}

double dissipation(const PhaseState& s, const ModelParams& p) {
  const Grid& g = s.phi().grid();
  const int d = g.dim();
  const Field phi_phys = to_physical(s.phi());
  const auto gradu = velocity_gradient(s.u());
  const VectorField gmu = to_physical(grad(to_spectral(s.mu())));
  double acc = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    double du2 = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double dij = 0.5 * (gradu[i * d + j].phys()[q] +
                                  gradu[j * d + i].phys()[q]);
        du2 += dij * dij;
      }
    double gm2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = gmu[a].phys()[q];
      gm2 += x * x;
    }
    const double sphi = phi_phys.phys()[q];
    acc += 2.0 * p.viscosity(sphi) * du2 + p.mobility(sphi) * gm2;
  }
  const double val = acc * g.volume() / static_cast<double>(g.size());
  if (!std::isfinite(val)) throw NumericalError("dissipation overflowed");
  return val;
}

VectorField korteweg_force(const PhaseState& s, const ModelParams&) {
  const Grid& g = s.phi().grid();
  const VectorField gphi = to_physical(grad(s.phi()));
  VectorField force(g, Repr::Physical);
  for (int a = 0; a < g.dim(); ++a) force[a] = multiply(s.mu(), gphi[a]);
  return dealias(to_spectral(force));
}

double viscosity_eval(const ModelParams& p, double s) { return p.viscosity(s); }
double mobility_eval(const ModelParams& p, double s) { return p.mobility(s); }

Field viscosity_field(const ModelParams& p, const Field& phi) {
  return apply(phi, [&](double s) { return p.viscosity(s); });
}

Field mobility_field(const ModelParams& p, const Field& phi) {
  return apply(phi, [&](double s) { return p.mobility(s); });
}

}  // namespace fchflow
