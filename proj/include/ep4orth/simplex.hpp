#pragma once

#include "ep4orth/types.hpp"

#include <algorithm>
#include <numeric>

namespace ep4orth {

/// Euclidean projection of c onto Delta(x) = {z : x^T z = 1, z >= 0} for a
/// nonnegative unit x. The solution is z = max(c - lambda x, 0) on supp(x)
/// and z_i = max(c_i, 0) where x_i = 0; lambda is found by sorting the
/// breakpoints c_i / x_i.
inline Vector project_delta(const Vector& x, const Vector& c, double* lambda_out = nullptr) {
  const Index n = x.size();
  if (c.size() != n) throw Error(ErrorCode::BadShape, "project_delta: size mismatch");

  std::vector<Index> support;
  support.reserve(std::size_t(n));
  for (Index i = 0; i < n; ++i)
    if (x(i) > 0.0) support.push_back(i);
  if (support.empty()) throw Error(ErrorCode::InfeasibleSupport, "project_delta: x has no positive entry");

  std::vector<double> breaks(support.size());
  for (std::size_t a = 0; a < support.size(); ++a) breaks[a] = c(support[a]) / x(support[a]);
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return breaks[a] > breaks[b]; });

  // Active set = m largest breakpoints; phi(lambda) = sum x_i c_i - lambda sum x_i^2.
  double xc = 0.0;
  double xx = 0.0;
  double lambda = 0.0;
  for (std::size_t m = 0; m < order.size(); ++m) {
    const Index i = support[order[m]];
    xc += x(i) * c(i);
    xx += x(i) * x(i);
    lambda = (xc - 1.0) / xx;
    const double lower = (m + 1 < order.size()) ? breaks[order[m + 1]] : -std::numeric_limits<double>::infinity();
    if (lambda >= lower) break;
  }

  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = x(i) > 0.0 ? std::max(c(i) - lambda * x(i), 0.0) : std::max(c(i), 0.0);
  if (lambda_out != nullptr) *lambda_out = lambda;
  return z;
}

/// Column-wise projection onto Delta(X).
inline Matrix project_delta_columns(const Matrix& x, const Matrix& c) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = project_delta(x.col(j), c.col(j));
  return out;
}

}  // namespace ep4orth
