#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <string>
#include <vector>

#include "gpwells/errors.hpp"

namespace gpwells {

/// Discrete -Laplacian used for the kinetic energy, the flow and the residual.
///   second_order: 5-point stencil (Dirichlet stiffness form, sum of squared
///                 edge differences).
///   fourth_order: 4th-order cross stencil, odd reflection across the ring.
enum class Stencil { second_order, fourth_order };

inline const char* to_string(Stencil s) {
  return s == Stencil::second_order ? "second_order" : "fourth_order";
}

/// Uniform square grid on [-L, L]^2 with n nodes per side. The outer ring of
/// nodes carries the homogeneous Dirichlet condition.
template <typename Scalar>
struct Grid2D {
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  int n = 64;
  Scalar L = Scalar(8);
  Stencil stencil = Stencil::fourth_order;

  Grid2D() = default;
  Grid2D(int n_, Scalar L_, Stencil s = Stencil::fourth_order) : n(n_), L(L_), stencil(s) {
    if (n < 16) throw ConfigurationError("grid needs n >= 16, got " + std::to_string(n));
    if (!(L > 0)) throw ConfigurationError("grid half-width must be positive");
  }

  Scalar h() const { return Scalar(2) * L / Scalar(n - 1); }
  Scalar coord(int i) const { return -L + Scalar(i) * h(); }
  Point point(int ix, int iy) const { return Point(coord(ix), coord(iy)); }
  int interior_side() const { return n - 2; }
  Eigen::Index interior_size() const {
    return Eigen::Index(n - 2) * Eigen::Index(n - 2);
  }

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.n == b.n && a.L == b.L && a.stencil == b.stencil;
  }
  friend bool operator!=(const Grid2D& a, const Grid2D& b) { return !(a == b); }
};

template <typename Scalar>
using FieldArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Real grid function, values(iy, ix) at (coord(ix), coord(iy)).
/// Wavefunctions keep the boundary ring at zero; sampled potentials may not.
template <typename Scalar>
class Field {
 public:
  using Array = FieldArray<Scalar>;

  Field() = default;
  explicit Field(const Grid2D<Scalar>& g) : grid_(g), values_(Array::Zero(g.n, g.n)) {}
  Field(const Grid2D<Scalar>& g, Array v) : grid_(g), values_(std::move(v)) {
    if (values_.rows() != g.n || values_.cols() != g.n)
      throw GridMismatchError("field array shape does not match grid");
  }

  const Grid2D<Scalar>& grid() const { return grid_; }
  const Array& values() const { return values_; }
  Array& values() { return values_; }

  Scalar operator()(int iy, int ix) const { return values_(iy, ix); }
  Scalar& operator()(int iy, int ix) { return values_(iy, ix); }

  void zero_boundary() {
    const int n = grid_.n;
    values_.row(0).setZero();
    values_.row(n - 1).setZero();
    values_.col(0).setZero();
    values_.col(n - 1).setZero();
  }

  bool is_dirichlet() const {
    const int n = grid_.n;
    return (values_.row(0) == 0).all() && (values_.row(n - 1) == 0).all() &&
           (values_.col(0) == 0).all() && (values_.col(n - 1) == 0).all();
  }

  bool all_finite() const { return values_.isFinite().all(); }

  /// Interior nodes flattened row-major, (iy-1)*(n-2) + (ix-1).
  VectorX<Scalar> interior() const {
    const int m = grid_.n - 2;
    VectorX<Scalar> v(Eigen::Index(m) * m);
    for (int iy = 0; iy < m; ++iy)
      v.segment(Eigen::Index(iy) * m, m) = values_.row(iy + 1).segment(1, m).transpose();
    return v;
  }

  static Field from_interior(const Grid2D<Scalar>& g, const VectorX<Scalar>& v) {
    const int m = g.n - 2;
    if (v.size() != Eigen::Index(m) * m)
      throw GridMismatchError("interior vector size does not match grid");
    Field f(g);
    for (int iy = 0; iy < m; ++iy)
      f.values_.row(iy + 1).segment(1, m) = v.segment(Eigen::Index(iy) * m, m).transpose();
    return f;
  }

 private:
  Grid2D<Scalar> grid_;
  Array values_;
};

template <typename Scalar>
inline void require_same_grid(const Field<Scalar>& u, const Field<Scalar>& v) {
  if (u.grid() != v.grid()) throw GridMismatchError("fields live on different grids");
}

template <typename Scalar>
Field<Scalar> operator-(const Field<Scalar>& u, const Field<Scalar>& v) {
  require_same_grid(u, v);
  return Field<Scalar>(u.grid(), u.values() - v.values());
}

template <typename Scalar>
Field<Scalar> operator+(const Field<Scalar>& u, const Field<Scalar>& v) {
  require_same_grid(u, v);
  return Field<Scalar>(u.grid(), u.values() + v.values());
}

template <typename Scalar>
Field<Scalar> operator*(Scalar c, const Field<Scalar>& u) {
  return Field<Scalar>(u.grid(), c * u.values());
}

namespace detail {

/// 1D second-difference weights {center, first neighbour, second neighbour},
/// scaled by 1/h^2 later.
template <typename Scalar>
struct StencilWeights {
  Scalar c0, c1, c2;
};

template <typename Scalar>
StencilWeights<Scalar> weights(Stencil s) {
  if (s == Stencil::second_order) return {Scalar(2), Scalar(-1), Scalar(0)};
  return {Scalar(5) / Scalar(2), Scalar(-4) / Scalar(3), Scalar(1) / Scalar(12)};
}

}  // namespace detail

/// -Laplacian applied to a Dirichlet field; the result is zero on the ring.
template <typename Scalar>
Field<Scalar> neg_laplacian(const Field<Scalar>& u) {
  const auto& g = u.grid();
  const int n = g.n;
  const auto w = detail::weights<Scalar>(g.stencil);
  const Scalar inv_h2 = Scalar(1) / (g.h() * g.h());
  const auto& a = u.values();
  Field<Scalar> out(g);
  auto& o = out.values();
  // Ghost value two nodes out of the interior is the odd reflection -u.
  auto far = [&](int iy, int ix, int dy, int dx) -> Scalar {
    const int jy = iy + 2 * dy, jx = ix + 2 * dx;
    if (jy < 0) return -a(-jy, jx);
    if (jy > n - 1) return -a(2 * (n - 1) - jy, jx);
    if (jx < 0) return -a(jy, -jx);
    if (jx > n - 1) return -a(jy, 2 * (n - 1) - jx);
    return a(jy, jx);
  };
  for (int iy = 1; iy < n - 1; ++iy) {
    for (int ix = 1; ix < n - 1; ++ix) {
      Scalar s = Scalar(2) * w.c0 * a(iy, ix) +
                 w.c1 * (a(iy, ix - 1) + a(iy, ix + 1) + a(iy - 1, ix) + a(iy + 1, ix));
      if (w.c2 != Scalar(0)) {
        s += w.c2 * (far(iy, ix, 0, -1) + far(iy, ix, 0, 1) + far(iy, ix, -1, 0) +
                     far(iy, ix, 1, 0));
      }
      o(iy, ix) = s * inv_h2;
    }
  }
  return out;
}

/// Sparse -Laplacian on the interior unknowns (row-major interior ordering),
/// plus an optional diagonal term.
template <typename Scalar, int Options = Eigen::ColMajor>
Eigen::SparseMatrix<Scalar, Options> assemble_operator(const Grid2D<Scalar>& g,
                                                       const VectorX<Scalar>* diagonal = nullptr) {
  const int m = g.n - 2;
  const auto w = detail::weights<Scalar>(g.stencil);
  const Scalar inv_h2 = Scalar(1) / (g.h() * g.h());
  const Eigen::Index size = Eigen::Index(m) * m;
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(std::size_t(size) * (w.c2 != Scalar(0) ? 9 : 5));
  auto idx = [m](int iy, int ix) { return Eigen::Index(iy) * m + ix; };
  for (int iy = 0; iy < m; ++iy) {
    for (int ix = 0; ix < m; ++ix) {
      const Eigen::Index k = idx(iy, ix);
      Scalar d = Scalar(2) * w.c0;
      // The odd reflection folds the ghost two nodes out back onto this node.
      if (w.c2 != Scalar(0)) {
        if (ix == 0) d -= w.c2;
        if (ix == m - 1) d -= w.c2;
        if (iy == 0) d -= w.c2;
        if (iy == m - 1) d -= w.c2;
      }
      Scalar diag = d * inv_h2;
      if (diagonal) diag += (*diagonal)(k);
      t.emplace_back(k, k, diag);
      const int off[2] = {1, 2};
      for (int s = 0; s < (w.c2 != Scalar(0) ? 2 : 1); ++s) {
        const Scalar c = (s == 0 ? w.c1 : w.c2) * inv_h2;
        const int o = off[s];
        if (ix - o >= 0) t.emplace_back(k, idx(iy, ix - o), c);
        if (ix + o < m) t.emplace_back(k, idx(iy, ix + o), c);
        if (iy - o >= 0) t.emplace_back(k, idx(iy - o, ix), c);
        if (iy + o < m) t.emplace_back(k, idx(iy + o, ix), c);
      }
    }
  }
  Eigen::SparseMatrix<Scalar, Options> A(size, size);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

/// Energy pieces of E_a(u) = int |grad u|^2 + V u^2 - (a/2) u^4.
template <typename Scalar>
struct EnergyBreakdown {
  Scalar kinetic = 0;
  Scalar potential = 0;
  Scalar quartic = 0;
  Scalar total = 0;
  Scalar a = 0;
};

/// h^2 * sum u^2 (trapezoid with a zero ring).
template <typename Scalar>
Scalar mass(const Field<Scalar>& u) {
  const Scalar h = u.grid().h();
  return h * h * u.values().square().sum();
}

template <typename Scalar>
Scalar kinetic(const Field<Scalar>& u) {
  const Scalar h = u.grid().h();
  return h * h * (u.values() * neg_laplacian(u).values()).sum();
}

template <typename Scalar>
Scalar potential_energy(const Field<Scalar>& u, const Field<Scalar>& V) {
  require_same_grid(u, V);
  const Scalar h = u.grid().h();
  return h * h * (V.values() * u.values().square()).sum();
}

template <typename Scalar>
Scalar quartic(const Field<Scalar>& u) {
  const Scalar h = u.grid().h();
  return h * h * u.values().square().square().sum();
}

template <typename Scalar>
EnergyBreakdown<Scalar> energy(const Field<Scalar>& u, const Field<Scalar>& V, Scalar a) {
  if (!u.all_finite() || !V.all_finite()) throw NumericError("energy: non-finite field values");
  EnergyBreakdown<Scalar> e;
  e.a = a;
  e.kinetic = kinetic(u);
  e.potential = potential_energy(u, V);
  e.quartic = quartic(u);
  e.total = e.kinetic + e.potential - a * e.quartic / Scalar(2);
  if (!std::isfinite(e.total)) throw NumericError("energy: non-finite result");
  return e;
}

/// (a*/2) int u^4 / (int |grad u|^2 int u^2); bounded by 1 in the continuum.
template <typename Scalar>
Scalar gn_ratio(const Field<Scalar>& u, Scalar a_star) {
  const Scalar m = mass(u);
  if (!(m > 0)) throw DomainError("gn_ratio of the zero field");
  const Scalar k = kinetic(u);
  if (!(k > 0)) throw DomainError("gn_ratio: field has no kinetic energy");
  return a_star / Scalar(2) * quartic(u) / (k * m);
}

template <typename Scalar>
Scalar h1_distance(const Field<Scalar>& u, const Field<Scalar>& v) {
  require_same_grid(u, v);
  const Field<Scalar> d = u - v;
  return std::sqrt(mass(d) + kinetic(d));
}

using Grid = Grid2D<double>;
using FieldD = Field<double>;
using Energy = EnergyBreakdown<double>;
using Point = Eigen::Vector2d;

}  // namespace gpwells
