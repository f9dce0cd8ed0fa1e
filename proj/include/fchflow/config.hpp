#pragma once

#include <array>
#include <string>
#include <vector>

#include "fchflow/grid.hpp"
#include "fchflow/model.hpp"
#include "fchflow/solver.hpp"

namespace fchflow {

// Initial-condition block. `phi` selects the phase generator:
//   constant     phi == phi_mean
//   random       phi_mean + seeded uniform noise in [-amplitude, amplitude],
//                optionally smoothed (filter > 0 damps mode m by
//                exp(-filter |m| / m_max)), mean re-projected to phi_mean
//                exactly in the spectral zero mode
//   single-mode  phi_mean + amplitude cos(2 pi sum_j mode_j x_j / L_j)
//   tanh-stripe  phi_mean + amplitude tanh(sin(2 pi x_0 / L_0) / width)
//   restart      resume from the snapshot at `restart` (velocity block and
//                the remaining phase keys are ignored)
// `velocity` selects the flow generator: zero, or taylor-green with the
// given amplitude.
struct IcConfig {
  std::string phi = "random";
  double phi_mean = 0.0;
  double amplitude = 0.01;
  unsigned long long seed = 1;
  double filter = 0.0;
  std::array<int, 3> mode = {1, 0, 0};
  double width = 0.2;
  std::string velocity = "zero";
  double velocity_amplitude = 1.0;
  std::string restart;
};

struct SolverBlock {
  Scheme scheme = Scheme::SemiImplicitEuler;
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  std::string forcing = "none";  // none | decaying-product | steady-stripe
};

struct OutputBlock {
  std::string directory = "out";
  int diagnostics_every = 1;
  int lp_every = 10;
  std::vector<double> snapshot_times;
};

struct TwinBlock {
  bool enabled = false;
  double perturbation = 0.0;
  unsigned long long seed = 2;
  double fit_window_fraction = 0.25;
  int sample_every = 1;
};

struct RunConfig {
  GridConfig grid;
  ModelParams model;  // finalized by parse_config
  SolverBlock solver;
  IcConfig ic;
  OutputBlock output;
  TwinBlock twin;
  double gamma = 1.0;  // weight of the mobility terms inside lambda
};

// Parses the INI-style text documented in the README: [section] headers,
// key = value pairs, # comments, values tokenized on whitespace. Unlisted
// keys get their defaults; the serializer echoes every key back. model.eta
// has no default and must be present. Throws UnknownKeyError,
// MissingKeyError, BadValueError and its named refinements
// (OddGridSizeError, NonPositiveFloorError, NonPositiveStepError).
RunConfig parse_config(const std::string& text);

// Canonical text form: every section and key in fixed order, doubles at
// round-trip precision, so parse(serialize(parse(text))) is an identity.
std::string serialize_config(const RunConfig& cfg);

// Reads and parses a config file; IoError when the file cannot be read.
RunConfig load_config(const std::string& path);

// Materializes the solver block: scheme, steps, safety factor, and the
// forcing closures for the named manufactured case (none leaves them
// empty). The grid must be the one built from cfg.grid.
SolverConfig make_solver_config(const RunConfig& cfg, const Grid& g);

}  // namespace fchflow
