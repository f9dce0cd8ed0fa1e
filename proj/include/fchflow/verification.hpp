#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fchflow/field.hpp"
#include "fchflow/model.hpp"
#include "fchflow/solver.hpp"

namespace fchflow {

// Finite-difference directional derivative of the free energy,
// (E(phi + eps psi) - E(phi - eps psi)) / (2 eps), the independent oracle
// for compute_mu: the two agree to O(eps^2) for smooth fields. eps must lie
// in [1e-7, 1e-3] (std::domain_error otherwise); the difference is also
// evaluated at 2 eps and a step-halving disagreement beyond first order
// throws NumericalError, which catches non-smooth inputs and cancellation.
double variational_oracle(const Field& phi, const Field& psi, double eps,
                          const ModelParams& p);

// A manufactured solution: closed-form fields sampled per time plus the
// body forcings that make them exact solutions of the discrete system.
// The forcings embed the grid and params given to make_mms, so a case is
// bound to that discretization.
struct MMSCase {
  std::string name;
  int bandwidth = 0;  // largest integer mode carried by phi_exact
  std::function<Field(double)> phi_exact;
  std::function<VectorField(double)> u_exact;
  std::function<Field(double)> dphi_dt_exact;
  std::function<VectorField(double)> du_dt_exact;
  ForcingSpec forcing;
};

// Catalog:
//   "decaying-product"  phi* = e^-t cos x cos y,
//                       u*   = e^-t (sin x cos y, -cos x sin y); 2D only.
//                       Forcing is assembled on the case's own grid, so the
//                       exact fields solve the semi-discrete system there.
//   "steady-stripe"     phi* = sum of frozen odd-sine modes m = 1..9 in x
//                       (a tanh-like front profile), u* = 0, all time-
//                       independent. Forcing is assembled alias-free on an
//                       internal reference grid and restricted, so coarse
//                       grids keep their genuine truncation error.
// Both require a 2 pi box. Unknown ids throw ConfigError.
MMSCase make_mms(const std::string& case_id, const Grid& g,
                 const ModelParams& p);

// Max-norm residuals of the exact fields under the case's forcing at time t:
// |tendency(phi*, u*) - d/dt exact| for each equation.
struct MMSResidual {
  double phi = 0.0;
  double u = 0.0;
};
MMSResidual mms_residual(const MMSCase& c, const ModelParams& p, double t);

// Refinement study against the exact fields at t_end. levels holds dt
// (temporal) or n (spatial); slope is the least-squares slope of log error
// against log level; monotone records whether the error never grew under
// refinement (a false value flags the study, the slope is still reported).
struct ConvergenceStudy {
  std::vector<double> levels;
  std::vector<double> errors;
  double slope = 0.0;
  bool monotone = true;
};

// Integrates the case from its exact initial data at every dt in dts
// (>= 3 levels) on the fixed grid g and measures the combined L2 error of
// phi and u at t_end. Levels run concurrently; FCHFLOW_THREADS caps the
// workers.
ConvergenceStudy temporal_convergence(const std::string& case_id,
                                      const Grid& g, const ModelParams& p,
                                      Scheme scheme,
                                      const std::vector<double>& dts,
                                      double t_end);

// Runs the case at fixed small dt for the given number of steps on square
// grids n x n with the dealias mask wide open (fraction 1), so resolution
// alone sets the error floor; measures the max-norm error. Expect a cliff
// while n cannot carry the solution's bandwidth and a spectral plateau
// once n exceeds twice that bandwidth.
ConvergenceStudy spatial_convergence(const std::string& case_id,
                                     const ModelParams& p,
                                     const std::vector<int>& resolutions,
                                     double dt, std::size_t steps);

// "level,error,slope" rows, 17 significant digits.
std::string study_csv(const ConvergenceStudy& s);

// L^p norm recomputed on a grid with twice the points per axis via
// zero-padded spectral interpolation: an independent quadrature route for
// cross-checking lp_norm on band-limited data. p in {2, 3, 4, 6}
// (std::domain_error otherwise).
double bruteforce_lp_norm(const Field& f, double p);

// Copies the spectral coefficients representable strictly below the Nyquist
// frequency of both grids and zeroes the rest: restriction onto a coarser
// grid, zero-padded interpolation onto a finer one. Grids must share dim
// and box lengths. Spectral output.
Field spectral_restrict(const Field& src, const Grid& target);

}  // namespace fchflow
