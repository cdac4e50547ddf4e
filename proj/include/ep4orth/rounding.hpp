#pragma once

#include "ep4orth/types.hpp"

#include <cmath>

namespace ep4orth {

/// A point of S^{n,k}_+ together with its sign pattern.
struct FeasiblePoint {
  Matrix x;
  Eigen::MatrixXi h;  // sgn(X): at most one 1 per row
  bool reset = false; // true when the identity fallback fired
};

/// I_{n,k}.
inline Matrix identity_nk(Index n, Index k) { return Matrix::Identity(n, k); }

inline Eigen::MatrixXi sign_pattern(const Matrix& x) {
  return (x.array() != 0.0).cast<int>().matrix();
}

/// Rounds a point of OB^{n,k}_+ into S^{n,k}_+: each row keeps its largest
/// entry (smallest column index on ties), columns that lost entries are
/// renormalized, and a column left empty resets the whole result to I_{n,k}.
inline FeasiblePoint round_to_feasible(const Matrix& x) {
  const Index n = x.rows();
  const Index k = x.cols();
  Eigen::MatrixXi h = Eigen::MatrixXi::Zero(n, k);
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    for (Index j = 1; j < k; ++j)
      if (x(i, j) > x(i, best)) best = j;
    h(i, best) = 1;
  }
  FeasiblePoint out;
  out.x = Matrix::Zero(n, k);
  for (Index j = 0; j < k; ++j) {
    bool dropped = false;
    for (Index i = 0; i < n; ++i) {
      if (h(i, j) == 1) out.x(i, j) = x(i, j);
      else dropped = dropped || x(i, j) != 0.0;
    }
    const double norm = out.x.col(j).norm();
    if (!(norm > 0.0)) {
      out.x = identity_nk(n, k);
      out.h = sign_pattern(out.x);
      out.reset = true;
      return out;
    }
    if (dropped) out.x.col(j) /= norm;
  }
  out.h = sign_pattern(out.x);
  return out;
}

/// rho~_q; at q = 1, where two branches apply, the larger (q <= 1) one is used.
inline double rho_tilde_q(Index k, double q) {
  if (!(q > 0.0)) throw Error(ErrorCode::InvalidParameter, "rho_q: q must be positive");
  const double rk = std::sqrt(double(k));
  if (q >= 2.0) return 1.0;
  if (q > 1.0) return (rk + 1.0) / q;
  return 2.0 * rk * (rk + 1.0) / (q * (q + 1.0));
}

/// rho_q = (2 k rho~_q / omega_min)^{1/2}.
inline double rho_q(const PenaltyContext& ctx, double q) {
  return std::sqrt(2.0 * double(ctx.k()) * rho_tilde_q(ctx.k(), q) / ctx.omega_min());
}

/// feasi = ||X^T X - I_k||_F + ||min(X, 0)||_F.
inline double feasibility_violation(const Matrix& x) {
  const Index k = x.cols();
  return (x.transpose() * x - Matrix::Identity(k, k)).norm() + x.cwiseMin(0.0).norm();
}

}  // namespace ep4orth
