#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fchflow/field.hpp"
#include "fchflow/model.hpp"
#include "fchflow/solver.hpp"

namespace fchflow {

// Instantaneous norms feeding the extension-criterion monitors:
// velocity integrability pairs (p,q) in {(4,8), (6,4), (inf,2)} and
// gradient pairs {(2,4), (3,2)}.
struct SerrinSample {
  double u_l4 = 0.0;
  double u_l6 = 0.0;
  double u_linf = 0.0;
  double gradu_l2 = 0.0;
  double gradu_l3 = 0.0;
  double gradu_l6 = 0.0;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;        // integral of phi
  double kinetic = 0.0;     // 1/2 ||u||^2
  double elastic = 0.0;     // phase energy E(phi)
  double total = 0.0;       // kinetic + elastic
  double dissipation = 0.0;
  double energy_residual = 0.0;  // (total - prev total)/dt + dissipation
  double mu_mean = 0.0;          // integral of mu
  SerrinSample norms;
  double int_u_l4_q8 = 0.0;
  double int_u_l6_q4 = 0.0;
  double int_u_linf_q2 = 0.0;
  double int_gradu_l2_q4 = 0.0;
  double int_gradu_l3_q2 = 0.0;
  double lambda = 0.0;
  double h_a_integral = 0.0;
};

struct DiagnosticsOptions {
  int scalar_every = 1;  // record emission cadence, in steps
  int lp_every = 10;     // norm refresh cadence; integrals hold the last value
  double gamma = 1.0;    // weight of the mobility terms inside lambda
};

// Everything a restart must carry to make split-run accumulators agree
// with an unsplit run.
struct AccumulatorState {
  double prev_total = 0.0;
  double prev_t = 0.0;
  bool has_prev = false;
  SerrinSample cached;
  double h_a_cached = 0.0;
  double int_u_l4_q8 = 0.0;
  double int_u_l6_q4 = 0.0;
  double int_u_linf_q2 = 0.0;
  double int_gradu_l2_q4 = 0.0;
  double int_gradu_l3_q2 = 0.0;
  double h_a_integral = 0.0;
  std::size_t observations = 0;
};

// Higher-order functional 1/2 ||grad u||^2 + gamma/2 int m(phi)|grad mu|^2
// + gamma (u . grad phi, mu), with the two-sided quadratic bounds that hold
// whenever the cross term is dominated by the quadratic part.
struct LambdaResult {
  double lambda = 0.0;
  double grad_u_sq = 0.0;       // ||grad u||^2
  double grad_mu_sq = 0.0;      // ||grad mu||^2
  double weighted_grad_mu = 0.0;  // int m(phi) |grad mu|^2
  double cross = 0.0;           // (u . grad phi, mu)
  double lower = 0.0;
  double upper = 0.0;
  bool cross_small = false;  // |gamma cross| <= half the quadratic sum
  bool bounds_ok = true;     // lower <= lambda <= upper when asserted
};

LambdaResult lambda_functional(const PhaseState& s, const ModelParams& p,
                               double gamma);

SerrinSample serrin_norms(const PhaseState& s);

// Single-run integrand of the Gronwall weight: both solution slots of the
// pairwise definition are fed with the same trajectory,
// h_a = 1 + ||u||_L4^8 + ||grad u||^2 + ||mu||_H1^2 + 2 ||phi||_H3^2.
double h_a_sample(const PhaseState& s);

// Pairwise Gronwall weight for twin runs.
double h_a_pair(const PhaseState& a, const PhaseState& b);

// Accumulates per-step diagnostics over one trajectory. observe() must see
// the initial state first and then every committed step; it advances the
// running integrals by the left-endpoint rule on every call and emits a
// record at the scalar cadence. Throws BlowUpError when a monitored norm
// leaves [0, 1e12] or stops being finite.
class DiagnosticsCollector {
 public:
  DiagnosticsCollector(const ModelParams& p, DiagnosticsOptions opt);

  std::optional<DiagnosticsRecord> observe(const PhaseState& s);

  const AccumulatorState& accumulators() const { return acc_; }
  void restore(const AccumulatorState& acc) { acc_ = acc; }
  const DiagnosticsOptions& options() const { return opt_; }

 private:
  ModelParams params_;
  DiagnosticsOptions opt_;
  AccumulatorState acc_;
};

struct TwinRecord {
  double t = 0.0;
  double H = 0.0;  // 1/2 ||u1-u2||^2 + 1/2 ||lap(phi1-phi2)||^2
  double h_a = 0.0;
  double envelope = 0.0;
};

struct TwinOptions {
  double fit_window_fraction = 0.25;  // share of the horizon used for the fit
  int sample_every = 1;
};

struct TwinResult {
  std::vector<TwinRecord> records;
  double c_fit = 0.0;
  bool violated = false;
  double first_violation_t = 0.0;
};

// Marches both states in lockstep, sampling the distance functional H and
// the Gronwall weight. The envelope H(0) exp(C int h_a) uses a nonnegative
// least-squares rate fitted over the initial window; H is checked against
// it on the remainder. Identical inputs keep H at exactly zero.
TwinResult twin_run(PhaseState s1, PhaseState s2, const ModelParams& p,
                    const SolverConfig& cfg, const TwinOptions& opt = {});

// Zero-mean pressure reconstructed from -lap P = div[(u.grad)u
// - div(2 nu D) - mu grad phi]; returned in physical space.
Field recover_pressure(const PhaseState& s, const ModelParams& p);

}  // namespace fchflow
