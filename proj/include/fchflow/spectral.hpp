#pragma once

#include "fchflow/field.hpp"

namespace fchflow {

// Representation changes. Forward scaling is 1/N so the zero mode equals
// the mean; backward synthesis takes real parts. Round trips preserve
// data to machine precision but are not bitwise identities.
Field transform(const Field& f, Repr target);
Field to_physical(const Field& f);
Field to_spectral(const Field& f);
VectorField to_physical(const VectorField& v);
VectorField to_spectral(const VectorField& v);

// Differential operators, spectral output. Inputs in either representation
// (physical inputs are transformed first). All use the derivative
// wavenumber table, so the Nyquist mode differentiates to zero and
// divergence(grad(f)) == laplacian(f) exactly.
VectorField grad(const Field& f);
Field divergence(const VectorField& v);
Field laplacian(const Field& f);

// Zeroes every mode outside the grid's dealias mask. Requires spectral
// input; idempotent bitwise.
Field dealias(const Field& f);
VectorField dealias(const VectorField& v);

// Projects onto the divergence-free subspace, mode by mode:
// u_k -> u_k - k (k . u_k)/|k|^2, zero mode passed through. Spectral output.
VectorField leray_project(const VectorField& v);

// L^p norm over the box. p = 2 evaluates in the representation given
// (quadrature or Parseval sum); other finite p use uniform-grid quadrature
// of |f|^p, which on a periodic box is the trapezoidal rule; p = inf is the
// max norm. p < 1 throws std::domain_error.
double lp_norm(const Field& f, double p);
// Vector version over the pointwise Euclidean magnitude.
double lp_norm(const VectorField& v, double p);

// H^s norm via the spectral sum (s in {0,1,2,3}; s = 0 is the L^2 norm).
// Out-of-range s throws std::domain_error.
double sobolev_norm(const Field& f, int s);
double sobolev_norm(const VectorField& v, int s);

// Discrete L^2 inner product (uniform quadrature / Parseval).
double inner(const Field& a, const Field& b);
double inner(const VectorField& a, const VectorField& b);

// Integral over the box and mean value (mean is the spectral zero mode).
double integral(const Field& f);
double mean_value(const Field& f);

// Pointwise helpers on physical-representation fields.
Field multiply(const Field& a, const Field& b);
Field apply(const Field& a, const std::function<double(double)>& fn);
void axpy(double alpha, const Field& x, Field& y);  // y += alpha * x

// Frobenius gradient tensor of a vector field: dim x dim physical fields,
// entry (i,j) = d u_j / d x_i, flattened row-major.
std::vector<Field> velocity_gradient(const VectorField& u);

// max_x |u(x)| (pointwise Euclidean magnitude), physical evaluation.
double max_pointwise_magnitude(const VectorField& u);

}  // namespace fchflow
