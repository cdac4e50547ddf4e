#pragma once

#include "ep4orth/simplex.hpp"
#include "ep4orth/types.hpp"

namespace ep4orth {

/// Nearest point of the nonnegative unit sphere to a vector. A column with no
/// positive entry maps to e_i, i = argmax c_i (smallest index on ties).
inline Vector project_sphere_plus(const Vector& c) {
  Vector out = c.cwiseMax(0.0);
  const double norm = out.norm();
  if (norm > 0.0) return out / norm;
  Index best = 0;
  for (Index i = 1; i < c.size(); ++i)
    if (c(i) > c(best)) best = i;
  out.setZero();
  out(best) = 1.0;
  return out;
}

/// Column-wise projection onto OB^{n,k}_+. Returns the raw matrix so the
/// solvers can stay allocation-light; wrap in ObliqueMatrix when needed.
inline Matrix project_oblique_plus_raw(const Matrix& c) {
  Matrix out(c.rows(), c.cols());
  for (Index j = 0; j < c.cols(); ++j) out.col(j) = project_sphere_plus(c.col(j));
  return out;
}

/// Projection onto {X in OB^{n,k}_+ : X_ij = 0 where mask_ij = 0}. Every
/// column of the mask must have at least one nonzero.
inline Matrix project_oblique_plus_masked(const Matrix& c, const Eigen::MatrixXi& mask) {
  Matrix out = Matrix::Zero(c.rows(), c.cols());
  for (Index j = 0; j < c.cols(); ++j) {
    std::vector<Index> rows;
    for (Index i = 0; i < c.rows(); ++i)
      if (mask(i, j) != 0) rows.push_back(i);
    if (rows.empty()) throw Error(ErrorCode::EmptyColumnSupport, "masked projection: empty column support");
    Vector sub(Index(rows.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) sub(Index(a)) = c(rows[a], j);
    const Vector proj = project_sphere_plus(sub);
    for (std::size_t a = 0; a < rows.size(); ++a) out(rows[a], j) = proj(Index(a));
  }
  return out;
}

inline ObliqueMatrix project_oblique_plus(const Matrix& c) {
  if (!c.allFinite()) throw Error(ErrorCode::BadShape, "project_oblique_plus: non-finite input");
  return ObliqueMatrix(project_oblique_plus_raw(c));
}

/// grad f(X) = G - X Diag(X^T G).
inline Matrix riemannian_grad(const Matrix& x, const Matrix& g) {
  require_same_shape(x, g, "riemannian_grad");
  Matrix out = g;
  for (Index j = 0; j < x.cols(); ++j) out.col(j) -= x.col(j).dot(g.col(j)) * x.col(j);
  return out;
}

/// Largest |x_j . d_j| over columns.
inline double tangency_violation(const Matrix& x, const Matrix& d) {
  double worst = 0.0;
  for (Index j = 0; j < x.cols(); ++j) worst = std::max(worst, std::abs(x.col(j).dot(d.col(j))));
  return worst;
}

/// Hess f(X)[D] = P_X(H_D) - D Diag(X^T G), with H_D the Euclidean Hessian applied
/// to D and P_X the column-wise tangent projection. For tangent D its quadratic
/// form equals <D, H_D - D Diag(X^T G)>.
inline Matrix riemannian_hess_apply(const Matrix& x, const Matrix& g, const Matrix& h_d,
                                    const Matrix& d, bool check_tangent = true) {
  require_same_shape(x, g, "riemannian_hess_apply");
  require_same_shape(x, h_d, "riemannian_hess_apply");
  require_same_shape(x, d, "riemannian_hess_apply");
  if (check_tangent && tangency_violation(x, d) > 1e-8) {
    throw Error(ErrorCode::NotTangent, "riemannian_hess_apply: direction is not tangent");
  }
  Matrix out = h_d;
  for (Index j = 0; j < x.cols(); ++j) {
    out.col(j) -= x.col(j).dot(h_d.col(j)) / x.col(j).squaredNorm() * x.col(j);
    out.col(j) -= x.col(j).dot(g.col(j)) * d.col(j);
  }
  return out;
}

/// Projection onto T(X) = {D : x_j^T d_j = 0, x_j + d_j >= 0}, computed as
/// Pi_Delta(x_j + d_j) - x_j column by column.
inline Matrix project_tangent_T(const Matrix& x, const Matrix& d) {
  require_same_shape(x, d, "project_tangent_T");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const Vector xj = x.col(j);
    out.col(j) = project_delta(xj, xj + d.col(j)) - xj;
  }
  return out;
}

/// Polar factor U W^T of M = U S W^T. Singular vectors are sign-normalized so
/// the largest-magnitude entry of each left vector is positive; M = 0 gives I.
inline Matrix project_orthogonal_group(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::BadShape, "project_orthogonal_group: not square");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU();
  Matrix w = svd.matrixV();
  for (Index i = 0; i < u.cols(); ++i) {
    Index arg = 0;
    u.col(i).cwiseAbs().maxCoeff(&arg);
    if (u(arg, i) < 0.0) {
      u.col(i) *= -1.0;
      w.col(i) *= -1.0;
    }
  }
  return u * w.transpose();
}

/// Column-wise normalization retraction R_X(D) = normalize(x_j + d_j).
inline Matrix retract_normalize(const Matrix& x, const Matrix& d) {
  Matrix out = x + d;
  for (Index j = 0; j < out.cols(); ++j) out.col(j).normalize();
  return out;
}

}  // namespace ep4orth
