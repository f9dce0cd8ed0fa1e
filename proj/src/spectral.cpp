#include "fchflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fchflow {

namespace {

const std::complex<double> kI{0.0, 1.0};

double quadrature_weight(const Grid& g) {
  return g.volume() / static_cast<double>(g.size());
}

}  // namespace

Field transform(const Field& f, Repr target) {
  if (f.repr() == target) return f;
  const Grid& g = f.grid();
  Field out(g, target);
  const std::size_t n = g.size();
  if (target == Repr::Spectral) {
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = f.phys()[i];
    g.execute_forward(buf.data(), out.spec().data());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& c : out.spec()) c *= scale;
  } else {
    std::vector<std::complex<double>> buf(n);
    g.execute_backward(f.spec().data(), buf.data());
    for (std::size_t i = 0; i < n; ++i) out.phys()[i] = buf[i].real();
  }
  return out;
}

Field to_physical(const Field& f) { return transform(f, Repr::Physical); }
Field to_spectral(const Field& f) { return transform(f, Repr::Spectral); }

VectorField to_physical(const VectorField& v) {
  VectorField out = v;
  for (int a = 0; a < v.dim(); ++a) out[a] = to_physical(v[a]);
  return out;
}

VectorField to_spectral(const VectorField& v) {
  VectorField out = v;
  for (int a = 0; a < v.dim(); ++a) out[a] = to_spectral(v[a]);
  return out;
}

VectorField grad(const Field& f) {
  const Field hat = to_spectral(f);
  const Grid& g = f.grid();
  VectorField out(g, Repr::Spectral);
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const int idx[3] = {i0, i1, i2};
    const auto c = hat.spec()[flat];
    for (int a = 0; a < g.dim(); ++a)
      out[a].spec()[flat] = kI * g.deriv_wavenumber(a, idx[a]) * c;
  });
  return out;
}

Field divergence(const VectorField& v) {
  const VectorField hat = to_spectral(v);
  const Grid& g = v.grid();
  Field out(g, Repr::Spectral);
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const int idx[3] = {i0, i1, i2};
    std::complex<double> s = 0.0;
    for (int a = 0; a < g.dim(); ++a)
      s += kI * g.deriv_wavenumber(a, idx[a]) * hat[a].spec()[flat];
    out.spec()[flat] = s;
  });
  return out;
}

Field laplacian(const Field& f) {
  const Field hat = to_spectral(f);
  const Grid& g = f.grid();
  Field out(g, Repr::Spectral);
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    out.spec()[flat] = -g.k2_at(i0, i1, i2) * hat.spec()[flat];
  });
  return out;
}

Field dealias(const Field& f) {
  if (f.repr() != Repr::Spectral)
    throw std::invalid_argument("dealias requires spectral representation");
  const Grid& g = f.grid();
  Field out = f;
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    if (!g.mask_keeps(i0, i1, i2)) out.spec()[flat] = 0.0;
  });
  return out;
}

VectorField dealias(const VectorField& v) {
  VectorField out = v;
  for (int a = 0; a < v.dim(); ++a) out[a] = dealias(v[a]);
  return out;
}

VectorField leray_project(const VectorField& v) {
  const VectorField hat = to_spectral(v);
  const Grid& g = v.grid();
  VectorField out = hat;
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const int idx[3] = {i0, i1, i2};
    double k[3] = {0.0, 0.0, 0.0};
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      k[a] = g.deriv_wavenumber(a, idx[a]);
      k2 += k[a] * k[a];
    }
    if (k2 == 0.0) return;  // zero mode (and pure-Nyquist modes) pass through
    std::complex<double> dot = 0.0;
    for (int a = 0; a < g.dim(); ++a) dot += k[a] * hat[a].spec()[flat];
    dot /= k2;
    for (int a = 0; a < g.dim(); ++a) out[a].spec()[flat] -= k[a] * dot;
  });
  return out;
}

double lp_norm(const Field& f, double p) {
  if (p < 1.0) throw std::domain_error("lp_norm requires p >= 1");
  const Grid& g = f.grid();
  if (std::isinf(p)) {
    const Field ph = to_physical(f);
    double m = 0.0;
    for (double v : ph.phys()) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 2.0 && f.repr() == Repr::Spectral) {
    double s = 0.0;
    for (const auto& c : f.spec()) s += std::norm(c);
    return std::sqrt(g.volume() * s);
  }
  const Field ph = to_physical(f);
  double s = 0.0;
  if (p == 2.0) {
    for (double v : ph.phys()) s += v * v;
    return std::sqrt(quadrature_weight(g) * s);
  }
  for (double v : ph.phys()) s += std::pow(std::abs(v), p);
  return std::pow(quadrature_weight(g) * s, 1.0 / p);
}

double lp_norm(const VectorField& v, double p) {
  if (p < 1.0) throw std::domain_error("lp_norm requires p >= 1");
  const Grid& g = v.grid();
  if (p == 2.0 && v.repr() == Repr::Spectral) {
    double s = 0.0;
    for (int a = 0; a < v.dim(); ++a)
      for (const auto& c : v[a].spec()) s += std::norm(c);
    return std::sqrt(g.volume() * s);
  }
  const VectorField ph = to_physical(v);
  const std::size_t n = g.size();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mag2 = 0.0;
      for (int a = 0; a < v.dim(); ++a) {
        const double x = ph[a].phys()[i];
        mag2 += x * x;
      }
      m = std::max(m, mag2);
    }
    return std::sqrt(m);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mag2 = 0.0;
    for (int a = 0; a < v.dim(); ++a) {
      const double x = ph[a].phys()[i];
      mag2 += x * x;
    }
    s += std::pow(mag2, 0.5 * p);
  }
  return std::pow(quadrature_weight(g) * s, 1.0 / p);
}

double sobolev_norm(const Field& f, int s) {
  if (s < 0 || s > 3) throw std::domain_error("sobolev_norm supports s in 0..3");
  if (s == 0) return lp_norm(to_spectral(f), 2.0);
  const Field hat = to_spectral(f);
  const Grid& g = f.grid();
  double acc = 0.0;
  for_each_index(g, [&](std::size_t flat, int i0, int i1, int i2) {
    const double k2 = g.k2_at(i0, i1, i2);
    double w = 1.0;
    for (int j = 0; j < s; ++j) w *= k2;
    acc += (1.0 + w) * std::norm(hat.spec()[flat]);
  });
  return std::sqrt(g.volume() * acc);
}

double sobolev_norm(const VectorField& v, int s) {
  double acc = 0.0;
  for (int a = 0; a < v.dim(); ++a) {
    const double x = sobolev_norm(v[a], s);
    acc += x * x;
  }
  return std::sqrt(acc);
}

double inner(const Field& a, const Field& b) {
  if (a.repr() == Repr::Spectral && b.repr() == Repr::Spectral) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.spec().size(); ++i)
      s += (std::conj(a.spec()[i]) * b.spec()[i]).real();
    return a.grid().volume() * s;
  }
  const Field pa = to_physical(a), pb = to_physical(b);
  double s = 0.0;
  for (std::size_t i = 0; i < pa.phys().size(); ++i)
    s += pa.phys()[i] * pb.phys()[i];
  return quadrature_weight(a.grid()) * s;
}

double inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += inner(a[i], b[i]);
  return s;
}

double integral(const Field& f) { return f.grid().volume() * mean_value(f); }

double mean_value(const Field& f) {
  if (f.repr() == Repr::Spectral) return f.spec()[0].real();
  double s = 0.0;
  for (double v : f.phys()) s += v;
  return s / static_cast<double>(f.grid().size());
}

Field multiply(const Field& a, const Field& b) {
  Field out = a;
  for (std::size_t i = 0; i < out.phys().size(); ++i) out.phys()[i] *= b.phys()[i];
  return out;
}

Field apply(const Field& a, const std::function<double(double)>& fn) {
  Field out = a;
  for (auto& v : out.phys()) v = fn(v);
  return out;
}

void axpy(double alpha, const Field& x, Field& y) {
  if (x.repr() == Repr::Spectral) {
    for (std::size_t i = 0; i < y.spec().size(); ++i)
      y.spec()[i] += alpha * x.spec()[i];
  } else {
    for (std::size_t i = 0; i < y.phys().size(); ++i)
      y.phys()[i] += alpha * x.phys()[i];
  }
}

std::vector<Field> velocity_gradient(const VectorField& u) {
  const int d = u.dim();
  std::vector<Field> out(static_cast<std::size_t>(d) * d);
  for (int j = 0; j < d; ++j) {
    VectorField gj = grad(u[j]);
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i) * d + j] = to_physical(gj[i]);
  }
  return out;
}

double max_pointwise_magnitude(const VectorField& u) {
  return lp_norm(u, std::numeric_limits<double>::infinity());
}

}  // namespace fchflow
