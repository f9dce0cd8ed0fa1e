#pragma once

#include "fchflow/config.hpp"
#include "fchflow/field.hpp"

namespace fchflow {

// Builds the configured phase field. The random generator is fully
// deterministic in the seed (raw mt19937_64 bits, no distribution
// adapters); its spectral zero mode is set to phi_mean exactly after the
// optional smoothing filter. The restart kind is resolved by the runner,
// not here, so it throws ConfigError.
Field initial_phi(const Grid& g, const IcConfig& ic);

// Zero flow or the Taylor-Green vortex scaled to the box: in 2D
//   u = A ( sin X cos Y, -cos X sin Y ),  X = 2 pi x / L0, Y = 2 pi y / L1,
// in 3D the same X/Y structure modulated by cos Z with a zero third
// component. Solenoidal by construction.
VectorField initial_velocity(const Grid& g, const IcConfig& ic);

// The perturbation added to a twin's phase field: the same smoothed-noise
// generator as the random phase kind, amplitude-normalized, with exactly
// zero mean so the twins share their conserved mass.
Field twin_perturbation(const Grid& g, const IcConfig& ic,
                        const TwinBlock& twin);

}  // namespace fchflow
