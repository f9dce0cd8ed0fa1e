#pragma once

#include <cstddef>
#include <functional>

#include "fchflow/field.hpp"
#include "fchflow/grid.hpp"
#include "fchflow/model.hpp"

namespace fchflow {

enum class Scheme { SemiImplicitEuler, ExplicitRK4 };

// Optional body forcings, evaluated in physical space at the requested time.
// Either slot may be empty.
struct ForcingSpec {
  std::function<Field(double)> g_phi;
  std::function<VectorField(double)> g_u;
  bool empty() const { return !g_phi && !g_u; }
};

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::SemiImplicitEuler;
  double cfl_safety = 0.5;
  ForcingSpec forcing;

  // Rejects non-positive dt / t_end / cfl_safety out of (0,1], and for the
  // explicit scheme a dt above the linear stability ceiling.
  void validate(const Grid& g, const ModelParams& p) const;
};

// Largest stable step of classical RK4 applied to the stiffest linear modes,
// 2.78 / (m_bar k_max^6 + nu_bar k_max^2) with k_max the largest retained
// wavenumber magnitude.
double rk4_stiffness_dt(const Grid& g, const ModelParams& p);

// Advective step limit cfl_safety * min(dx) / max|u|.
double stable_dt(const PhaseState& s, const SolverConfig& cfg);

// Fully explicit right-hand sides evaluated at the state's own time.
// Both are spectral and dealiased; dphi has its zero mode removed so the
// phase mean is conserved exactly, du is solenoidally projected.
struct Tendency {
  Field dphi;
  VectorField du;
};
Tendency compute_tendency(const PhaseState& s, const ModelParams& p,
                          const ForcingSpec& forcing);

// Unprojected momentum flux -(u . grad)u + div(2 nu(phi) D(u)) + mu grad(phi),
// spectral and dealiased. Its solenoidal part is the velocity tendency; its
// gradient part is carried by the pressure.
VectorField momentum_flux(const PhaseState& s, const ModelParams& p);

// One semi-implicit update of a single unknown, leaving the state untouched.
// Both evaluate the explicit tendency at the frozen input state; the linear
// stiff part (m_bar k^6 for the phase, nu_bar k^2 for velocity) damps the
// increment. Returned fields are spectral.
Field step_phase(const PhaseState& s, const ModelParams& p,
                 const ForcingSpec& forcing, double dt);
VectorField step_velocity(const PhaseState& s, const ModelParams& p,
                          const ForcingSpec& forcing, double dt);

// Advances the coupled state by dt with the configured scheme and refreshes
// the chemical-potential caches. Both unknowns see the same frozen state.
void step(PhaseState& s, const ModelParams& p, const SolverConfig& cfg,
          double dt);

struct RunResult {
  std::size_t steps = 0;
  double final_time = 0.0;
};

// Marches the state to cfg.t_end, clamping each step to
// min(cfg.dt, stable_dt, remaining time). The observer runs after every
// committed step. Throws BlowUpError once max|phi| or max|u| leaves
// [0, 1e12] or stops being finite.
RunResult run(PhaseState& s, const ModelParams& p, const SolverConfig& cfg,
              const std::function<void(const PhaseState&, std::size_t)>&
                  observer = {});

}  // namespace fchflow
