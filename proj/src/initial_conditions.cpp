#include "fchflow/initial_conditions.hpp"

#include <cmath>
#include <random>

#include "fchflow/errors.hpp"
#include "fchflow/spectral.hpp"

namespace fchflow {
namespace {

// Zero-mean smoothed noise with max amplitude exactly `amplitude`;
// spectral output inside the dealias mask.
Field smoothed_noise(const Grid& g, unsigned long long seed, double amplitude,
                     double filter) {
  std::mt19937_64 rng(seed);
  Field white(g, Repr::Physical);
  for (auto& v : white.phys())
    v = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;

  Field hat = to_spectral(white);
  if (filter > 0.0) {
    const double kc = g.mode_cutoff(0) * kTwoPi / g.length(0);
    for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
      const double k = std::sqrt(g.k2_at(i0, i1, i2));
      hat.spec()[flat] *= std::exp(-filter * k / kc);
    });
  }
  hat = dealias(hat);
  hat.spec()[0] = 0.0;

  Field out = to_physical(hat);
  double peak = 0.0;
  for (double v : out.phys()) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? amplitude / peak : 0.0;
  for (auto& v : out.phys()) v *= scale;
  Field shat = to_spectral(out);
  shat.spec()[0] = 0.0;
  return shat;
}

}  // namespace

Field initial_phi(const Grid& g, const IcConfig& ic) {
  if (ic.phi == "constant") {
    Field phi(g, Repr::Spectral);
    phi.spec()[0] = ic.phi_mean;
    return phi;
  }
  if (ic.phi == "random") {
    Field phi = smoothed_noise(g, ic.seed, ic.amplitude, ic.filter);
    phi.spec()[0] = ic.phi_mean;
    return phi;
  }
  if (ic.phi == "single-mode") {
    const double a = ic.amplitude, mean = ic.phi_mean;
    const std::array<int, 3> m = ic.mode;
    return Field::sample(g, [&, m](const std::array<double, 3>& x) {
      double phase = 0.0;
      for (int j = 0; j < 3; ++j)
        phase += kTwoPi * m[j] * x[j] /
                 (j < g.dim() ? g.length(j) : 1.0);
      return mean + a * std::cos(phase);
    });
  }
  if (ic.phi == "tanh-stripe") {
    const double a = ic.amplitude, mean = ic.phi_mean, w = ic.width;
    const double l0 = g.length(0);
    return Field::sample(g, [=](const std::array<double, 3>& x) {
      return mean + a * std::tanh(std::sin(kTwoPi * x[0] / l0) / w);
    });
  }
  if (ic.phi == "restart")
    throw ConfigError("restart initial conditions are resolved by the runner");
  throw ConfigError("unknown phase initial condition: " + ic.phi);
}

VectorField initial_velocity(const Grid& g, const IcConfig& ic) {
  if (ic.velocity == "zero") return VectorField(g, Repr::Physical);
  if (ic.velocity == "taylor-green") {
    const double a = ic.velocity_amplitude;
    const double l0 = g.length(0), l1 = g.length(1);
    const double l2 = g.dim() == 3 ? g.length(2) : 1.0;
    const int dim = g.dim();
    return VectorField::sample(g, [=](const std::array<double, 3>& x) {
      const double X = kTwoPi * x[0] / l0;
      const double Y = kTwoPi * x[1] / l1;
      const double mod = dim == 3 ? std::cos(kTwoPi * x[2] / l2) : 1.0;
      return std::array<double, 3>{a * std::sin(X) * std::cos(Y) * mod,
                                   -a * std::cos(X) * std::sin(Y) * mod, 0.0};
    });
  }
  throw ConfigError("unknown velocity initial condition: " + ic.velocity);
}

Field twin_perturbation(const Grid& g, const IcConfig& ic,
                        const TwinBlock& twin) {
  return smoothed_noise(g, twin.seed, twin.perturbation, ic.filter);
}

}  // namespace fchflow
