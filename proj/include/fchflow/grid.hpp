#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>

namespace fchflow {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct GridConfig {
  int dim = 2;                                       // 2 or 3
  std::array<int, 3> n = {64, 64, 1};                // points per axis, even, >= 8
  std::array<double, 3> length = {kTwoPi, kTwoPi, kTwoPi};
  double dealias_fraction = 1.0 / 3.0;               // in (0, 1]
};

// Uniform periodic tensor grid plus its Fourier bookkeeping: signed
// wavenumber tables, the derivative table (Nyquist entry zeroed so all
// derivatives of real data stay real and div(grad f) == laplacian(f)
// holds identically), and the per-axis dealias mask.
//
// Copies share one immutable implementation, so a Grid is cheap to pass
// by value. FFT plans are cached per grid and executed through the
// new-array interface; plan creation is serialized internally, execution
// is safe from concurrent workers on distinct buffers.
class Grid {
 public:
  explicit Grid(const GridConfig& cfg);

  int dim() const;
  int n(int axis) const;
  double length(int axis) const;
  double dealias_fraction() const;
  std::size_t size() const;     // total grid points
  double volume() const;        // measure of the periodic box
  double dx(int axis) const;
  double coord(int axis, int index) const;  // index * dx

  // Signed frequency (2*pi/L scaling); the Nyquist entry keeps its
  // physical magnitude n/2 * 2*pi/L.
  double wavenumber(int axis, int index) const;
  // Same table with the Nyquist entry replaced by zero; used by every
  // differential operator.
  double deriv_wavenumber(int axis, int index) const;

  // Integer mode magnitude cutoff of the dealias mask per axis
  // (floor(dealias_fraction * n/2)).
  int mode_cutoff(int axis) const;
  // True when the mode at (i0, i1, i2) survives the mask: the signed
  // integer frequency m_j satisfies |m_j| <= fraction * n_j/2 on every axis.
  bool mask_keeps(int i0, int i1, int i2) const;

  // |k_d|^2 with the derivative-table convention, for flattened index math.
  double k2_at(int i0, int i1, int i2) const;

  // Largest |k| over mask-retained modes (used by explicit stability bounds).
  double max_retained_wavenumber() const;

  // Raw c2c transforms, unnormalized; `forward` leaves the 1/N scaling to
  // the caller (Field::transform applies it so the zero mode equals the mean).
  void execute_forward(const std::complex<double>* in, std::complex<double>* out) const;
  void execute_backward(const std::complex<double>* in, std::complex<double>* out) const;

  // Shape, lengths, and mask fraction all equal.
  bool compatible_with(const Grid& other) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Visits every flattened index together with its per-axis integer indices.
template <typename Fn>
void for_each_index(const Grid& g, Fn&& fn) {
  const int n0 = g.n(0), n1 = g.n(1), n2 = g.dim() == 3 ? g.n(2) : 1;
  std::size_t flat = 0;
  for (int i0 = 0; i0 < n0; ++i0)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2, ++flat) fn(flat, i0, i1, i2);
}

}  // namespace fchflow
