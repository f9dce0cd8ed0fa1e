#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "fchflow/grid.hpp"

namespace fchflow {

enum class Repr { Physical, Spectral };

// A scalar field on a Grid, tagged with its current representation.
// Physical data is real samples in row-major order; spectral data is the
// full complex coefficient array (conjugate-symmetric for real fields)
// normalized so the zero mode equals the spatial mean.
class Field {
 public:
  Field() = default;
  Field(const Grid& g, Repr repr);

  // Pointwise samples of fn(x) with x the physical coordinates (third
  // entry zero in 2D).
  static Field sample(const Grid& g,
                      const std::function<double(const std::array<double, 3>&)>& fn);

  const Grid& grid() const { return grid_; }
  Repr repr() const { return repr_; }
  bool empty() const { return phys_.empty() && spec_.empty(); }

  std::vector<double>& phys();
  const std::vector<double>& phys() const;
  std::vector<std::complex<double>>& spec();
  const std::vector<std::complex<double>>& spec() const;

 private:
  friend Field transform(const Field&, Repr);
  Grid grid_{GridConfig{}};
  Repr repr_ = Repr::Physical;
  std::vector<double> phys_;
  std::vector<std::complex<double>> spec_;
};

// A dim-component vector field with one Repr for all components.
class VectorField {
 public:
  VectorField() = default;
  VectorField(const Grid& g, Repr repr);

  static VectorField sample(
      const Grid& g,
      const std::function<std::array<double, 3>(const std::array<double, 3>&)>& fn);

  const Grid& grid() const { return comp_[0].grid(); }
  Repr repr() const { return comp_[0].repr(); }
  int dim() const { return dim_; }

  Field& operator[](int a) { return comp_[a]; }
  const Field& operator[](int a) const { return comp_[a]; }

 private:
  int dim_ = 0;
  std::array<Field, 3> comp_;
};

}  // namespace fchflow
