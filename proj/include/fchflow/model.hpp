#pragma once

#include <vector>

#include "fchflow/field.hpp"
#include "fchflow/spectral.hpp"

namespace fchflow {

// Strictly positive material coefficient law nu(s) or m(s), C^2 in s.
//   Constant:      law(s) = c
//   BoundedSmooth: law(s) = base + amplitude * s^2/(1+s^2) + floor
// min_value() is the recorded lower bound (the proofs' nu_* / m_*);
// construction rejects laws whose infimum is not positive.
class CoefficientLaw {
 public:
  enum class Kind { Constant, BoundedSmooth };

  static CoefficientLaw constant(double c);
  static CoefficientLaw bounded_smooth(double base, double amplitude, double floor);

  Kind kind() const { return kind_; }
  double operator()(double s) const;
  double deriv(double s, int order) const;  // order 1 or 2
  double min_value() const;                 // infimum over all s
  double max_over(double lo, double hi) const;  // sampled sup on [lo, hi]

  // Parameters as stored (constant value lives in base).
  double base() const { return base_; }
  double amplitude() const { return amplitude_; }
  double floor() const { return floor_; }

 private:
  CoefficientLaw(Kind k, double base, double amp, double floor);
  Kind kind_ = Kind::Constant;
  double base_ = 1.0;
  double amplitude_ = 0.0;
  double floor_ = 0.0;
};

// Polynomial double-well potential F(s) = sum coef[j] s^j with derivatives
// f = F', f' = F'', f'' = F''', f''' = F''''. The default is the quartic
// well F(s) = (s^2-1)^2/4, so f(s) = s^3 - s. Validity: even leading
// degree (>= 2) and positive leading coefficient.
class Potential {
 public:
  Potential();  // quartic well
  explicit Potential(std::vector<double> coef);

  double F(double s) const;
  double f(double s, int order) const;  // order in 0..3
  const std::vector<double>& coef() const { return coef_; }

 private:
  std::vector<double> coef_;
};

struct ModelParams {
  double eta = 0.0;  // interface energy dial, any sign; config layer requires it
  CoefficientLaw viscosity = CoefficientLaw::constant(1.0);
  CoefficientLaw mobility = CoefficientLaw::constant(1.0);
  Potential potential;
  // Splitting constants for the implicit stiff solves. Non-positive values
  // are replaced by max(min_value, sup of the law over [-1.5, 1.5]).
  double nu_bar = 0.0;
  double m_bar = 0.0;

  // Fills derived defaults and checks invariants; throws ConfigError.
  void finalize();
};

// Coupled state at one instant. phi and u are kept canonical: spectral
// representation, dealiased; u divergence-free. omega/mu caches equal
// compute_omega/compute_mu of the current phi bitwise while caches_valid().
class PhaseState {
 public:
  PhaseState() = default;

  // Canonicalizes the inputs (spectral + dealias; u Leray-projected) and
  // fills the caches.
  static PhaseState create(const ModelParams& p, const Field& phi0,
                           const VectorField& u0, double t0 = 0.0);

  double t = 0.0;

  const Field& phi() const { return phi_; }
  const VectorField& u() const { return u_; }
  const Field& omega() const;
  const Field& mu() const;
  bool caches_valid() const { return caches_valid_; }

  void set_phi(Field phi);        // canonicalizes, invalidates caches
  void set_u(VectorField u);      // canonicalizes, checks solenoidality
  void refresh_caches(const ModelParams& p);
  void invalidate_caches() { caches_valid_ = false; }

 private:
  Field phi_;
  VectorField u_;
  Field omega_, mu_;  // physical representation
  bool caches_valid_ = false;
};

// Pointwise potential derivatives on physical fields.
double f_eval(const Potential& pot, double s, int order);
Field f_eval(const Potential& pot, const Field& phi, int order);
double potential_F(const Potential& pot, double s);
Field potential_F(const Potential& pot, const Field& phi);

// omega = -laplacian(phi) + f(phi), dealiased; physical output.
Field compute_omega(const Field& phi, const ModelParams& p);
// mu = -laplacian(omega) + f'(phi) omega + eta omega with omega as above;
// products formed pointwise, result dealiased; physical output.
Field compute_mu(const Field& phi, const ModelParams& p);

// E(phi) = int [ (1/2)(-lap phi + f(phi))^2 + eta ((1/2)|grad phi|^2 + F(phi)) ].
// The integrand is evaluated pointwise (no dealiasing inside the quadrature).
// Throws NumericalError when the value is not finite.
double energy_E(const Field& phi, const ModelParams& p);
double kinetic_energy(const VectorField& u);
double total_energy(const PhaseState& s, const ModelParams& p);

// int [ 2 nu(phi) |Du|^2 + m(phi) |grad mu|^2 ], Du the symmetric gradient.
// Uses the state's mu cache.
double dissipation(const PhaseState& s, const ModelParams& p);

// Korteweg force mu grad(phi), pointwise product, dealiased; spectral output.
VectorField korteweg_force(const PhaseState& s, const ModelParams& p);

double viscosity_eval(const ModelParams& p, double s);
double mobility_eval(const ModelParams& p, double s);
Field viscosity_field(const ModelParams& p, const Field& phi);
Field mobility_field(const ModelParams& p, const Field& phi);

}  // namespace fchflow
