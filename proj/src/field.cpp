#include "fchflow/field.hpp"

#include <stdexcept>

namespace fchflow {

Field::Field(const Grid& g, Repr repr) : grid_(g), repr_(repr) {
  if (repr == Repr::Physical)
    phys_.assign(g.size(), 0.0);
  else
    spec_.assign(g.size(), {0.0, 0.0});
}

Field Field::sample(const Grid& g,
                    const std::function<double(const std::array<double, 3>&)>& fn) {
  Field f(g, Repr::Physical);
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const std::array<double, 3> x = {g.coord(0, i0), g.coord(1, i1),
                                     g.dim() == 3 ? g.coord(2, i2) : 0.0};
    f.phys_[flat] = fn(x);
  });
  return f;
}

std::vector<double>& Field::phys() {
  if (repr_ != Repr::Physical)
    throw std::logic_error("field is not in physical representation");
  return phys_;
}

const std::vector<double>& Field::phys() const {
  if (repr_ != Repr::Physical)
    throw std::logic_error("field is not in physical representation");
  return phys_;
}

std::vector<std::complex<double>>& Field::spec() {
  if (repr_ != Repr::Spectral)
    throw std::logic_error("field is not in spectral representation");
  return spec_;
}

const std::vector<std::complex<double>>& Field::spec() const {
  if (repr_ != Repr::Spectral)
    throw std::logic_error("field is not in spectral representation");
  return spec_;
}

VectorField::VectorField(const Grid& g, Repr repr) : dim_(g.dim()) {
  for (int a = 0; a < dim_; ++a) comp_[a] = Field(g, repr);
}

VectorField VectorField::sample(
    const Grid& g,
    const std::function<std::array<double, 3>(const std::array<double, 3>&)>& fn) {
  VectorField v(g, Repr::Physical);
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const std::array<double, 3> x = {g.coord(0, i0), g.coord(1, i1),
                                     g.dim() == 3 ? g.coord(2, i2) : 0.0};
    const std::array<double, 3> val = fn(x);
    for (int a = 0; a < v.dim_; ++a) v.comp_[a].phys()[flat] = val[a];
  });
  return v;
}

}  // namespace fchflow
