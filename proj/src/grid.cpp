#include "fchflow/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "fchflow/errors.hpp"

namespace fchflow {

namespace {

// FFTW plan creation/destruction is not thread safe; execution through the
// new-array interface is. One process-wide mutex serializes planning.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Grid::Impl {
  GridConfig cfg;
  std::size_t size = 0;
  double volume = 1.0;
  std::array<std::vector<double>, 3> wav;   // signed frequency, 2*pi/L scaled
  std::array<std::vector<double>, 3> dwav;  // derivative table, Nyquist zeroed
  std::array<int, 3> cutoff = {0, 0, 0};    // integer mask cutoffs
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

Grid::Grid(const GridConfig& cfg_in) {
  GridConfig cfg = cfg_in;
  if (cfg.dim != 2 && cfg.dim != 3)
    throw ConfigError("grid.dim must be 2 or 3");
  if (cfg.dim == 2) cfg.n[2] = 1;
  for (int a = 0; a < cfg.dim; ++a) {
    if (cfg.n[a] < 8 || cfg.n[a] % 2 != 0)
      throw ConfigError("grid.n must be even and at least 8 on every axis");
    if (!(cfg.length[a] > 0.0))
      throw ConfigError("grid.L must be positive on every axis");
  }
  if (!(cfg.dealias_fraction > 0.0) || cfg.dealias_fraction > 1.0)
    throw ConfigError("grid.dealias_fraction must lie in (0, 1]");

  auto impl = std::make_shared<Impl>();
  impl->cfg = cfg;
  impl->size = 1;
  impl->volume = 1.0;
  for (int a = 0; a < cfg.dim; ++a) {
    impl->size *= static_cast<std::size_t>(cfg.n[a]);
    impl->volume *= cfg.length[a];
  }
  for (int a = 0; a < 3; ++a) {
    const int n = a < cfg.dim ? cfg.n[a] : 1;
    const double scale = a < cfg.dim ? kTwoPi / cfg.length[a] : 0.0;
    impl->wav[a].resize(n);
    impl->dwav[a].resize(n);
    for (int i = 0; i < n; ++i) {
      const int m = i <= n / 2 ? i : i - n;
      impl->wav[a][i] = scale * m;
      impl->dwav[a][i] = (n > 1 && i == n / 2) ? 0.0 : scale * m;
    }
    impl->cutoff[a] =
        a < cfg.dim
            ? static_cast<int>(std::floor(cfg.dealias_fraction * (cfg.n[a] / 2) +
                                          1e-9))
            : 0;
  }

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    std::vector<std::complex<double>> a(impl->size), b(impl->size);
    int dims[3] = {cfg.n[0], cfg.n[1], cfg.n[2]};
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    impl->fwd = fftw_plan_dft(cfg.dim, dims, pa, pb, FFTW_FORWARD, flags);
    impl->bwd = fftw_plan_dft(cfg.dim, dims, pa, pb, FFTW_BACKWARD, flags);
    if (!impl->fwd || !impl->bwd)
      throw ConfigError("transform backend rejected the grid resolution");
  }
  impl_ = std::move(impl);
}

int Grid::dim() const { return impl_->cfg.dim; }
int Grid::n(int axis) const { return axis < impl_->cfg.dim ? impl_->cfg.n[axis] : 1; }
double Grid::length(int axis) const { return impl_->cfg.length[axis]; }
double Grid::dealias_fraction() const { return impl_->cfg.dealias_fraction; }
std::size_t Grid::size() const { return impl_->size; }
double Grid::volume() const { return impl_->volume; }
double Grid::dx(int axis) const { return impl_->cfg.length[axis] / impl_->cfg.n[axis]; }
double Grid::coord(int axis, int index) const { return dx(axis) * index; }

double Grid::wavenumber(int axis, int index) const { return impl_->wav[axis][index]; }
double Grid::deriv_wavenumber(int axis, int index) const { return impl_->dwav[axis][index]; }
int Grid::mode_cutoff(int axis) const { return impl_->cutoff[axis]; }

bool Grid::mask_keeps(int i0, int i1, int i2) const {
  const int idx[3] = {i0, i1, i2};
  for (int a = 0; a < impl_->cfg.dim; ++a) {
    const int n = impl_->cfg.n[a];
    const int m = idx[a] <= n / 2 ? idx[a] : idx[a] - n;
    if (std::abs(m) > impl_->cutoff[a]) return false;
  }
  return true;
}

double Grid::k2_at(int i0, int i1, int i2) const {
  const double k0 = impl_->dwav[0][i0];
  const double k1 = impl_->dwav[1][i1];
  const double k2 = impl_->cfg.dim == 3 ? impl_->dwav[2][i2] : 0.0;
  return k0 * k0 + k1 * k1 + k2 * k2;
}

double Grid::max_retained_wavenumber() const {
  double s = 0.0;
  for (int a = 0; a < impl_->cfg.dim; ++a) {
    const double k = impl_->cutoff[a] * kTwoPi / impl_->cfg.length[a];
    s += k * k;
  }
  return std::sqrt(s);
}

void Grid::execute_forward(const std::complex<double>* in,
                           std::complex<double>* out) const {
  fftw_execute_dft(impl_->fwd,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Grid::execute_backward(const std::complex<double>* in,
                            std::complex<double>* out) const {
  fftw_execute_dft(impl_->bwd,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

bool Grid::compatible_with(const Grid& other) const {
  if (impl_ == other.impl_) return true;
  const auto& a = impl_->cfg;
  const auto& b = other.impl_->cfg;
  if (a.dim != b.dim || a.dealias_fraction != b.dealias_fraction) return false;
  for (int i = 0; i < a.dim; ++i)
    if (a.n[i] != b.n[i] || a.length[i] != b.length[i]) return false;
  return true;
}

}  // namespace fchflow
