#pragma once

#include "ep4orth/driver.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <vector>

namespace ep4orth {

// ---------------------------------------------------------------------------
// Generators

/// Random B in S^{n,k}_+: each row joins one column uniformly (redrawn until no
/// column is empty), magnitudes are uniform on (0, 1], columns are normalized.
inline Matrix random_nonneg_stiefel(Index n, Index k, Rng& rng, std::vector<int>* labels = nullptr) {
  if (k < 1 || n < k) throw Error(ErrorCode::BadShape, "random_nonneg_stiefel: need n >= k >= 1");
  std::vector<int> lab(static_cast<std::size_t>(n));
  for (;;) {
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      lab[std::size_t(i)] = int(rng.below(std::uint64_t(k)));
      ++count[std::size_t(lab[std::size_t(i)])];
    }
    if (std::find(count.begin(), count.end(), 0) == count.end()) break;
  }
  Matrix b = Matrix::Zero(n, k);
  for (Index i = 0; i < n; ++i) b(i, lab[std::size_t(i)]) = 1.0 - rng.uniform01();
  for (Index j = 0; j < k; ++j) b.col(j).normalize();
  if (labels != nullptr) *labels = std::move(lab);
  return b;
}

inline std::vector<int> row_argmax_labels(const Matrix& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < x.cols(); ++j)
      if (x(i, j) > x(i, best)) best = j;
    out[std::size_t(i)] = int(best);
  }
  return out;
}

struct ProjectionInstance {
  Matrix c;
  Matrix x_star;  // unique projection of C when xi < 1
  Matrix l;
  double xi = 0.0;
};

/// Instance with a known projection: X* from a random sign pattern with
/// (1 + uniform) magnitudes, L with diagonal d in [0.5, 3.5] and off-diagonal
/// xi sqrt(d_i d_j) u_ij, and C = X* L^T.
inline ProjectionInstance gen_projection(Index n, Index k, double xi, std::uint64_t seed) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw Error(ErrorCode::InvalidParameter, "gen_projection: xi must lie in [0, 1]");
  Rng rng(seed);
  const Matrix b = random_nonneg_stiefel(n, k, rng);
  Matrix x = rng.uniform_matrix(n, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = b(i, j) > 0.0 ? 1.0 + x(i, j) : 0.0;
  for (Index j = 0; j < k; ++j) x.col(j).normalize();
  Vector d(k);
  for (Index i = 0; i < k; ++i) d(i) = 0.5 + 3.0 * rng.uniform01();
  Matrix l = rng.uniform_matrix(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) l(i, j) = i == j ? d(i) : xi * std::sqrt(d(i) * d(j)) * l(i, j);
  ProjectionInstance out;
  out.c = x * l.transpose();
  out.x_star = std::move(x);
  out.l = std::move(l);
  out.xi = xi;
  return out;
}

/// ||X - C||_F^2 written as -2 <C, X> + k + ||C||_F^2, exact on OB^{n,k}_+.
inline LinearObjective projection_objective(const Matrix& c) {
  return LinearObjective(-2.0 * c, double(c.cols()) + c.squaredNorm());
}

/// gap = ||X - C||_F / ||X* - C||_F - 1.
inline double gap(const Matrix& x_out, const Matrix& x_star, const Matrix& c) {
  require_same_shape(x_out, c, "gap");
  require_same_shape(x_star, c, "gap");
  const double ref = (x_star - c).norm();
  if (!(ref > 0.0)) throw Error(ErrorCode::InvalidParameter, "gap: X* equals C");
  return (x_out - c).norm() / ref - 1.0;
}

struct OnmfInstance {
  Matrix a;
  Index k = 0;
  std::vector<int> labels;  // row-argmax of B
  Matrix b;
  double xi = 0.0;
};

/// A = B C / ||B C||_F + xi D / ||D||_F with C, D uniform.
inline OnmfInstance gen_onmf(Index n, Index r, Index k, double xi, std::uint64_t seed) {
  if (r < 1 || !(xi >= 0.0)) throw Error(ErrorCode::InvalidParameter, "gen_onmf: need r >= 1 and xi >= 0");
  Rng rng(seed);
  OnmfInstance out;
  out.b = random_nonneg_stiefel(n, k, rng, &out.labels);
  const Matrix c = rng.uniform_matrix(k, r);
  const Matrix d = rng.uniform_matrix(n, r);
  out.a = out.b * c;
  out.a /= out.a.norm();
  if (xi > 0.0) out.a += (xi / d.norm()) * d;
  out.k = k;
  out.xi = xi;
  return out;
}

/// Drops all-zero rows and columns; the kept indices are returned.
inline Matrix remove_degenerate(const Matrix& a, std::vector<Index>* kept_rows = nullptr,
                                std::vector<Index>* kept_cols = nullptr) {
  std::vector<Index> rows, cols;
  for (Index i = 0; i < a.rows(); ++i)
    if (a.row(i).cwiseAbs().maxCoeff() > 0.0) rows.push_back(i);
  for (Index j = 0; j < a.cols(); ++j)
    if (a.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);
  Matrix out(Index(rows.size()), Index(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(Index(i), Index(j)) = a(rows[i], cols[j]);
  if (kept_rows != nullptr) *kept_rows = rows;
  if (kept_cols != nullptr) *kept_cols = cols;
  return out;
}

// ---------------------------------------------------------------------------
// ONMF / OPNMF objectives

/// Y = Pi_+(A^T X (X^T X)^{-1}); the Gram matrix is regularized by 1e-12 I if
/// its Cholesky factorization fails.
inline Matrix onmf_gauss_newton_Y(const Matrix& a, const Matrix& x) {
  if (a.rows() != x.rows()) throw Error(ErrorCode::DimensionMismatch, "onmf_gauss_newton_Y: row mismatch");
  const Index k = x.cols();
  Matrix gram = x.transpose() * x;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    gram += 1e-12 * Matrix::Identity(k, k);
    llt.compute(gram);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularGram, "onmf_gauss_newton_Y: X^T X is singular");
  }
  const Matrix atx = a.transpose() * x;  // r x k
  // (A^T X) G^{-1} = (G^{-1} X^T A)^T since G is symmetric.
  const Matrix y = llt.solve(atx.transpose()).transpose();
  return y.cwiseMax(0.0);
}

/// Partial Gauss-Newton model ||A - X Y^T||_F^2 with Y refreshed from X^{t,0}
/// at every outer iteration.
class OnmfGaussNewtonObjective : public Objective {
 public:
  explicit OnmfGaussNewtonObjective(Matrix a) : a_(std::move(a)), a_norm2_(a_.squaredNorm()) {}

  void begin_outer_iteration(const Matrix& x) override { set_y(onmf_gauss_newton_Y(a_, x)); }

  void set_y(Matrix y) {
    y_ = std::move(y);
    ay_ = a_ * y_;
    yty_ = y_.transpose() * y_;
    lipschitz_ = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(yty_, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  }

  double value(const Matrix& x) const override {
    ensure_ready();
    return a_norm2_ - 2.0 * ay_.cwiseProduct(x).sum() + (x.transpose() * x).cwiseProduct(yty_).sum();
  }
  Matrix gradient(const Matrix& x) const override {
    ensure_ready();
    return 2.0 * (x * yty_ - ay_);
  }
  Matrix hessian_apply(const Matrix& /*x*/, const Matrix& d) const override {
    ensure_ready();
    return 2.0 * d * yty_;
  }
  double gradient_lipschitz() const override { return lipschitz_; }

  const Matrix& a() const noexcept { return a_; }
  const Matrix& y() const noexcept { return y_; }

 private:
  void ensure_ready() const {
    if (y_.size() == 0) throw Error(ErrorCode::InvalidParameter, "OnmfGaussNewtonObjective: Y not initialized");
  }

  Matrix a_;
  double a_norm2_;
  Matrix y_, ay_, yty_;
  double lipschitz_ = -1.0;
};

/// Exact OPNMF objective ||A - X X^T A||_F^2 (quartic in X).
class OpnmfObjective : public Objective {
 public:
  explicit OpnmfObjective(Matrix a) : a_(std::move(a)), a_norm2_(a_.squaredNorm()) {}

  double value(const Matrix& x) const override {
    const Matrix w = a_.transpose() * x;  // r x k
    return a_norm2_ - 2.0 * w.squaredNorm() + (x.transpose() * x).cwiseProduct(w.transpose() * w).sum();
  }
  // With M = A A^T: grad = -4 M X + 2 X (X^T M X) + 2 M X (X^T X).
  Matrix gradient(const Matrix& x) const override {
    const Matrix mx = a_ * (a_.transpose() * x);
    return -4.0 * mx + 2.0 * x * (x.transpose() * mx) + 2.0 * mx * (x.transpose() * x);
  }
  Matrix hessian_apply(const Matrix& x, const Matrix& d) const override {
    const Matrix mx = a_ * (a_.transpose() * x);
    const Matrix md = a_ * (a_.transpose() * d);
    const Matrix xtx = x.transpose() * x;
    const Matrix dtx = d.transpose() * x;
    return -4.0 * md + 2.0 * d * (x.transpose() * mx) + 2.0 * x * (d.transpose() * mx + x.transpose() * md) +
           2.0 * md * xtx + 2.0 * mx * (dtx + dtx.transpose());
  }

  const Matrix& a() const noexcept { return a_; }

 private:
  Matrix a_;
  double a_norm2_;
};

/// NNDSVD-style start: each singular pair keeps its dominant sign part, then Pi_OB.
inline Matrix onmf_svd_init(const Matrix& a, Index k) {
  if (k < 1 || k > a.rows() || k > a.cols()) throw Error(ErrorCode::BadShape, "onmf_svd_init: k out of range");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix w(a.rows(), k);
  for (Index j = 0; j < k; ++j) {
    const Vector u = svd.matrixU().col(j);
    const Vector v = svd.matrixV().col(j);
    const Vector up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
    const double mp = up.norm() * v.cwiseMax(0.0).norm();
    const double mn = un.norm() * (-v).cwiseMax(0.0).norm();
    w.col(j) = mp >= mn ? up : un;
  }
  return project_oblique_plus_raw(w);
}

enum class OnmfModel { GaussNewton, Exact };

struct OnmfResult {
  SolveReport report;
  std::vector<int> labels;
  double resi = 0.0;
};

/// resi = ||A - X X^T A||_F for a feasible X.
inline double resi(const Matrix& a, const Matrix& x) {
  if (a.rows() != x.rows()) throw Error(ErrorCode::DimensionMismatch, "resi: row mismatch");
  if (feasibility_violation(x) > 1e-8) throw Error(ErrorCode::NotFeasible, "resi: X is not in S^{n,k}_+");
  return (a - x * (x.transpose() * a)).norm();
}

inline OnmfResult onmf_solve(const Matrix& a, Index k, const DriverConfig& cfg,
                             OnmfModel model = OnmfModel::GaussNewton) {
  if (a.minCoeff() < 0.0) throw Error(ErrorCode::NegativeEntry, "onmf_solve: A must be nonnegative");
  const PenaltyContext ctx(a.rows(), k);
  const Matrix x0 = onmf_svd_init(a, k);
  const QuadraticFormObjective refine = QuadraticFormObjective::from_factor(a, a.squaredNorm());
  OnmfResult out;
  if (model == OnmfModel::GaussNewton) {
    OnmfGaussNewtonObjective f(a);
    out.report = ep4orth_solve(f, ctx, cfg, x0, x0, &refine);
  } else {
    OpnmfObjective f(a);
    out.report = ep4orth_solve(f, ctx, cfg, x0, x0, &refine);
  }
  out.labels = row_argmax_labels(out.report.last_iterate);
  out.resi = resi(a, out.report.x);
  return out;
}

// ---------------------------------------------------------------------------
// K-indicators

/// min_Y ||U Y - X||_F^2 over orthogonal Y, which on OB^{n,k}_+ equals
/// 2k - 2 ||U^T X||_*. The gradient -2 U polar(U^T X) is the X-block gradient
/// of the two-block model at the exact Y-update, so gradient projection on
/// this objective is the PALM iteration. The Hessian is that of the X-block
/// (zero), and the Lipschitz constant is reported as 0 so fixed and PALM
/// steps scale with the penalty part alone.
class KIndicatorsObjective : public Objective {
 public:
  explicit KIndicatorsObjective(Matrix u) : u_(std::move(u)) {}

  Matrix y_update(const Matrix& x) const { return project_orthogonal_group(u_.transpose() * x); }

  double value(const Matrix& x) const override {
    Eigen::JacobiSVD<Matrix> svd(u_.transpose() * x);
    return 2.0 * double(x.cols()) - 2.0 * svd.singularValues().sum();
  }
  Matrix gradient(const Matrix& x) const override { return -2.0 * u_ * y_update(x); }
  Matrix hessian_apply(const Matrix& x, const Matrix& /*d*/) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }
  double gradient_lipschitz() const override { return 0.0; }

  const Matrix& u() const noexcept { return u_; }

 private:
  Matrix u_;
};

struct KIndicatorsResult {
  SolveReport report;
  Matrix y;
  std::vector<int> labels;
};

/// Penalty method with PALM inner steps; the rounded point is refined with
/// the linear objective -2 <U Y, X> at the final Y.
inline KIndicatorsResult kindicators_solve(const Matrix& u, const DriverConfig& cfg) {
  const Index k = u.cols();
  if ((u.transpose() * u - Matrix::Identity(k, k)).norm() > 1e-10) {
    throw Error(ErrorCode::InvalidParameter, "kindicators_solve: U must have orthonormal columns");
  }
  const PenaltyContext ctx(u.rows(), k);
  KIndicatorsObjective f(u);
  const Matrix x0 = project_oblique_plus_raw(u);
  DriverConfig run = cfg;
  run.postprocess = false;
  KIndicatorsResult out;
  out.report = ep4orth_solve(f, ctx, run, x0, x0);
  FeasiblePoint xr{out.report.x, sign_pattern(out.report.x), false};
  out.y = f.y_update(xr.x);
  if (cfg.postprocess) {
    const LinearObjective lin(-2.0 * u * out.y);
    xr = postprocess(xr, lin, ObjectiveKind::Linear);
    out.report.x = xr.x;
    out.y = f.y_update(xr.x);
  }
  out.report.objective = f.value(out.report.x);
  out.report.feasi = feasibility_violation(out.report.x);
  out.labels = row_argmax_labels(out.report.last_iterate);
  return out;
}

/// Orthonormalized noisy indicator features: Q factor of H + noise N(0, 1),
/// H the 0/1 indicator of random labels with every cluster nonempty.
inline Matrix gen_kindicators_features(Index n, Index k, double noise, std::uint64_t seed, std::vector<int>* labels) {
  Rng rng(seed);
  std::vector<int> lab;
  const Matrix b = random_nonneg_stiefel(n, k, rng, &lab);
  Matrix h = (b.array() > 0.0).cast<double>().matrix();
  h += noise * rng.normal_matrix(n, k);
  Eigen::HouseholderQR<Matrix> qr(h);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  if (labels != nullptr) *labels = std::move(lab);
  return q;
}

// ---------------------------------------------------------------------------
// Metrics

struct ClusteringMetrics {
  double purity = 0.0;
  double entropy = 0.0;
  double nmi = 0.0;
};

/// purity = sum_j max_i n_ij / n, entropy = -1/(n log2 k) sum n_ij log2(n_ij / n'_j),
/// nmi = I(C; C') / max(H(C), H(C')) with 0 log 0 = 0 and nmi = 0 when both entropies vanish.
inline ClusteringMetrics clustering_metrics(const std::vector<int>& pred, const std::vector<int>& truth, int k) {
  if (pred.size() != truth.size() || pred.empty() || k < 1) throw Error(ErrorCode::BadLabels, "clustering_metrics: bad sizes");
  const std::size_t n = pred.size();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);  // (truth i, predicted j)
  for (std::size_t a = 0; a < n; ++a) {
    if (pred[a] < 0 || pred[a] >= k || truth[a] < 0 || truth[a] >= k) {
      throw Error(ErrorCode::BadLabels, "clustering_metrics: label out of range");
    }
    counts(truth[a], pred[a]) += 1.0;
  }
  const double nn = double(n);
  const Vector ni = counts.rowwise().sum();
  const Vector nj = counts.colwise().sum().transpose();
  ClusteringMetrics m;
  for (int j = 0; j < k; ++j) m.purity += counts.col(j).maxCoeff();
  m.purity /= nn;

  double ent = 0.0;
  double mi = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double c = counts(i, j);
      if (c == 0.0) continue;
      ent += c * std::log2(c / nj(j));
      mi += c / nn * std::log2(nn * c / (ni(i) * nj(j)));
    }
  }
  m.entropy = k > 1 ? std::max(0.0, -ent / (nn * std::log2(double(k)))) : 0.0;
  auto h = [&](const Vector& sizes) {
    double s = 0.0;
    for (Index a = 0; a < sizes.size(); ++a)
      if (sizes(a) > 0.0) s -= sizes(a) / nn * std::log2(sizes(a) / nn);
    return s;
  };
  const double denom = std::max(h(ni), h(nj));
  m.nmi = denom > 0.0 ? mi / denom : 0.0;
  return m;
}

/// Mean spectral angle between true and estimated columns after greedy
/// minimal-angle matching.
inline double sad(const Matrix& y_hat, const Matrix& y_true) {
  require_same_shape(y_hat, y_true, "sad");
  const Index k = y_true.cols();
  Matrix angle(k, k);
  for (Index i = 0; i < k; ++i) {
    const double ni = y_true.col(i).norm();
    if (!(ni > 0.0)) throw Error(ErrorCode::ZeroColumn, "sad: zero column in Y");
    for (Index j = 0; j < k; ++j) {
      const double nj = y_hat.col(j).norm();
      if (!(nj > 0.0)) throw Error(ErrorCode::ZeroColumn, "sad: zero column in Y_hat");
      const double cosv = std::clamp(y_true.col(i).dot(y_hat.col(j)) / (ni * nj), -1.0, 1.0);
      angle(i, j) = std::acos(cosv);
    }
  }
  std::vector<bool> used_i(std::size_t(k), false), used_j(std::size_t(k), false);
  double total = 0.0;
  for (Index step = 0; step < k; ++step) {
    Index bi = -1, bj = -1;
    for (Index i = 0; i < k; ++i) {
      if (used_i[std::size_t(i)]) continue;
      for (Index j = 0; j < k; ++j) {
        if (used_j[std::size_t(j)]) continue;
        if (bi < 0 || angle(i, j) < angle(bi, bj)) {
          bi = i;
          bj = j;
        }
      }
    }
    used_i[std::size_t(bi)] = used_j[std::size_t(bj)] = true;
    total += angle(bi, bj);
  }
  return total / double(k);
}

}  // namespace ep4orth
