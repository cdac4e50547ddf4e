#pragma once

// Independent reference computations for the tests. None of these call the
// routine they are used to check.

#include "ep4orth/ep4orth.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using ep4orth::Index;
using ep4orth::Matrix;
using ep4orth::Vector;
using ScalarFn = std::function<double(const Matrix&)>;
using MatrixFn = std::function<Matrix(const Matrix&)>;

/// Strictly positive point of OB^{n,k}_+.
inline Matrix random_interior(Index n, Index k, ep4orth::Rng& rng) {
  Matrix x = rng.uniform_matrix(n, k).array() + 0.05;
  for (Index j = 0; j < k; ++j) x.col(j) /= x.col(j).norm();
  return x;
}

/// Column-wise tangent part of m at a point with unit columns.
inline Matrix sphere_tangent(const Matrix& x, Matrix m) {
  for (Index j = 0; j < x.cols(); ++j) m.col(j) -= x.col(j).dot(m.col(j)) * x.col(j);
  return m;
}

inline Matrix normalize_columns(Matrix m) {
  for (Index j = 0; j < m.cols(); ++j) m.col(j) /= m.col(j).norm();
  return m;
}

/// t -> f(normalize(X + t D)).
inline double along_curve(const ScalarFn& f, const Matrix& x, const Matrix& d, double t) {
  return f(normalize_columns(x + t * d));
}

/// First derivative at t = 0 by central differences with one Richardson step.
inline double fd_first(const ScalarFn& f, const Matrix& x, const Matrix& d, double h = 1e-4) {
  auto central = [&](double s) { return (along_curve(f, x, d, s) - along_curve(f, x, d, -s)) / (2.0 * s); };
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

/// Second derivative at t = 0 by central differences with one Richardson step.
inline double fd_second(const ScalarFn& f, const Matrix& x, const Matrix& d, double h = 1e-3) {
  const double f0 = f(x);
  auto central = [&](double s) {
    return (along_curve(f, x, d, s) - 2.0 * f0 + along_curve(f, x, d, -s)) / (s * s);
  };
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

/// Riemannian gradient entry by entry: the derivative along the sphere-tangent
/// part of every unit matrix E_ij.
inline Matrix fd_riemannian_gradient(const ScalarFn& f, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      Matrix e = Matrix::Zero(x.rows(), x.cols());
      e(i, j) = 1.0;
      out(i, j) = fd_first(f, x, sphere_tangent(x, e));
    }
  }
  return out;
}

/// Covariant derivative of a tangent field along D: tangent part of the
/// central difference of the field along the retraction curve.
inline Matrix fd_covariant(const MatrixFn& field, const Matrix& x, const Matrix& d, double h = 1e-5) {
  const Matrix plus = field(normalize_columns(x + h * d));
  const Matrix minus = field(normalize_columns(x - h * d));
  return sphere_tangent(x, (plus - minus) / (2.0 * h));
}

/// Projection onto {z : x.z = 1, z >= 0} by bisection on the multiplier.
inline Vector delta_projection_bisection(const Vector& x, const Vector& c) {
  auto z_of = [&](double lambda) {
    Vector z(x.size());
    for (Index i = 0; i < x.size(); ++i) z(i) = x(i) > 0.0 ? std::max(c(i) - lambda * x(i), 0.0) : std::max(c(i), 0.0);
    return z;
  };
  auto phi = [&](double lambda) { return x.dot(z_of(lambda)); };
  double lo = -1.0, hi = 1.0;
  while (phi(lo) < 1.0) lo *= 2.0;
  while (phi(hi) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 1.0 ? lo : hi) = mid;
  }
  return z_of(0.5 * (lo + hi));
}

/// Tangent-cone projection onto {d : x_j.d_j = 0, x_j + d_j >= 0} via the bisection kernel.
inline Matrix tangent_cone_projection(const Matrix& x, const Matrix& d) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = delta_projection_bisection(x.col(j), x.col(j) + d.col(j)) - x.col(j);
  return out;
}

/// min <g, Z - X> + 1/2 vec(Z - X)^T B vec(Z - X) over x_j.z_j = 1, Z >= 0,
/// by enumerating every set of entries fixed at zero and solving the KKT
/// system of the remaining equality-constrained QP. B must be positive
/// definite. Returns Z.
inline Matrix enumerate_qp(const Matrix& x, const Matrix& g, const Matrix& b) {
  const Index n = x.rows();
  const Index k = x.cols();
  const Index m = n * k;
  const Vector gv = Eigen::Map<const Vector>(g.data(), m);
  const Vector xv = Eigen::Map<const Vector>(x.data(), m);
  // Equality constraints A z = 1 with z = vec(Z).
  Matrix a = Matrix::Zero(k, m);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < n; ++i) a(j, j * n + i) = x(i, j);

  double best = std::numeric_limits<double>::infinity();
  Vector best_z;
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<Index> free;
    for (Index e = 0; e < m; ++e)
      if (!(mask & (1L << e))) free.push_back(e);
    const Index nf = Index(free.size());
    // KKT: B_ff z_f + A_f^T mu = B_f: xv - g_f ; A_f z_f = 1.
    Matrix kkt = Matrix::Zero(nf + k, nf + k);
    Vector rhs = Vector::Zero(nf + k);
    const Vector bx = b * xv;
    for (Index r = 0; r < nf; ++r) {
      for (Index c = 0; c < nf; ++c) kkt(r, c) = b(free[r], free[c]);
      for (Index j = 0; j < k; ++j) kkt(r, nf + j) = kkt(nf + j, r) = a(j, free[r]);
      rhs(r) = bx(free[r]) - gv(free[r]);
    }
    rhs.tail(k).setOnes();
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (lu.rank() < nf + k) continue;
    const Vector sol = lu.solve(rhs);
    Vector z = Vector::Zero(m);
    for (Index r = 0; r < nf; ++r) z(free[r]) = sol(r);
    if (z.minCoeff() < -1e-12) continue;
    z = z.cwiseMax(0.0);
    if ((a * z - Vector::Ones(k)).cwiseAbs().maxCoeff() > 1e-9) continue;
    const Vector s = z - xv;
    const double val = gv.dot(s) + 0.5 * s.dot(b * s);
    if (val < best) {
      best = val;
      best_z = z;
    }
  }
  Matrix out(n, k);
  Eigen::Map<Vector>(out.data(), m) = best_z;
  return out;
}

/// Largest <C, Y> over Y in S^{n,k}_+ by enumerating all row assignments
/// (row to one column or to none). For a fixed pattern the best column is the
/// normalized positive part of C on its rows, or the best single entry when
/// that part vanishes. Returns every pattern optimum so callers can test
/// uniqueness.
inline std::vector<Matrix> pattern_optima(const Matrix& c) {
  const Index n = c.rows();
  const Index k = c.cols();
  long total = 1;
  for (Index i = 0; i < n; ++i) total *= (k + 1);
  std::vector<Matrix> out;
  for (long code = 0; code < total; ++code) {
    std::vector<Index> col(static_cast<std::size_t>(n));
    long rest = code;
    for (Index i = 0; i < n; ++i) {
      col[std::size_t(i)] = Index(rest % (k + 1)) - 1;
      rest /= (k + 1);
    }
    Matrix y = Matrix::Zero(n, k);
    bool ok = true;
    for (Index j = 0; j < k && ok; ++j) {
      std::vector<Index> rows;
      for (Index i = 0; i < n; ++i)
        if (col[std::size_t(i)] == j) rows.push_back(i);
      if (rows.empty()) {
        ok = false;
        break;
      }
      double pos2 = 0.0;
      for (Index i : rows) pos2 += std::pow(std::max(c(i, j), 0.0), 2);
      if (pos2 > 0.0) {
        for (Index i : rows) y(i, j) = std::max(c(i, j), 0.0) / std::sqrt(pos2);
      } else {
        Index bi = rows.front();
        for (Index i : rows)
          if (c(i, j) > c(bi, j)) bi = i;
        y(bi, j) = 1.0;
      }
    }
    if (ok) out.push_back(std::move(y));
  }
  return out;
}

/// Largest off-diagonal |x_i . x_j|.
inline double max_cross(const Matrix& x) {
  double worst = 0.0;
  for (Index i = 0; i < x.cols(); ++i)
    for (Index j = i + 1; j < x.cols(); ++j) worst = std::max(worst, std::abs(x.col(i).dot(x.col(j))));
  return worst;
}

/// A 3 x 2 near-feasible matrix with its closed-form nearest point in S^{3,2}_+.
struct NearFeasible3x2 {
  Matrix x;
  Matrix proj;
};

inline NearFeasible3x2 near_feasible_3x2(double eps) {
  NearFeasible3x2 e;
  e.x.resize(3, 2);
  e.x << std::sqrt(1.0 - eps * eps - 2.0 * eps), eps,
         eps, std::sqrt(1.0 - eps * eps - eps),
         std::sqrt(2.0 * eps), std::sqrt(eps);
  const double s = std::sqrt(1.0 - eps * eps);
  e.proj.resize(3, 2);
  e.proj << std::sqrt(1.0 - eps * eps - 2.0 * eps) / s, 0.0,
            0.0, 1.0,
            std::sqrt(2.0 * eps) / s, 0.0;
  return e;
}

/// Linear cost sharing row 0: C (C11 = C12 = -1, rest 0).
inline Matrix shared_row_cost() {
  Matrix c = Matrix::Zero(3, 2);
  c(0, 0) = c(0, 1) = -1.0;
  return c;
}

/// Pure quadratic ||X - T||^2 / 2.
class DistanceObjective : public ep4orth::Objective {
 public:
  explicit DistanceObjective(Matrix t) : t_(std::move(t)) {}
  double value(const Matrix& x) const override { return 0.5 * (x - t_).squaredNorm(); }
  Matrix gradient(const Matrix& x) const override { return x - t_; }
  Matrix hessian_apply(const Matrix&, const Matrix& d) const override { return d; }
  double gradient_lipschitz() const override { return 1.0; }

 private:
  Matrix t_;
};

}  // namespace oracle
