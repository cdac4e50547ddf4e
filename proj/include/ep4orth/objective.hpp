#pragma once

#include "ep4orth/types.hpp"

namespace ep4orth {

/// Structure tag used to pick the closed-form refinement after rounding.
enum class ObjectiveKind { Linear, QuadraticForm, Generic };

/// Smooth objective on R^{n x k}: value, Euclidean gradient and Euclidean
/// Hessian-vector product.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual double value(const Matrix& x) const = 0;
  virtual Matrix gradient(const Matrix& x) const = 0;
  virtual Matrix hessian_apply(const Matrix& x, const Matrix& d) const = 0;

  virtual ObjectiveKind kind() const { return ObjectiveKind::Generic; }

  /// Lipschitz constant of the gradient over OB^{n,k}_+, when known
  /// (0 for linear objectives); negative means unknown.
  virtual double gradient_lipschitz() const { return -1.0; }

  /// Hook called by the penalty loop with X^{t,0} before each subproblem.
  /// Surrogate models (partial Gauss-Newton) refresh their frozen block here.
  virtual void begin_outer_iteration(const Matrix& /*x*/) {}
};

/// f(X) = <G, X> + offset.
class LinearObjective : public Objective {
 public:
  explicit LinearObjective(Matrix g, double offset = 0.0) : g_(std::move(g)), offset_(offset) {}

  double value(const Matrix& x) const override { return g_.cwiseProduct(x).sum() + offset_; }
  Matrix gradient(const Matrix& /*x*/) const override { return g_; }
  Matrix hessian_apply(const Matrix& x, const Matrix& /*d*/) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }
  ObjectiveKind kind() const override { return ObjectiveKind::Linear; }
  double gradient_lipschitz() const override { return 0.0; }

  const Matrix& coefficient() const noexcept { return g_; }
  void set_coefficient(Matrix g) { g_ = std::move(g); }

 private:
  Matrix g_;
  double offset_;
};

/// f(X) = -tr(X^T M X) + offset with M symmetric and entrywise nonnegative,
/// given either densely or through a factor F with M = F F^T.
class QuadraticFormObjective : public Objective {
 public:
  static QuadraticFormObjective from_matrix(Matrix m, double offset = 0.0) {
    QuadraticFormObjective out;
    out.m_ = std::move(m);
    out.offset_ = offset;
    return out;
  }
  static QuadraticFormObjective from_factor(Matrix f, double offset = 0.0) {
    QuadraticFormObjective out;
    out.factor_ = std::move(f);
    out.use_factor_ = true;
    out.offset_ = offset;
    return out;
  }

  /// M * X.
  Matrix apply_m(const Matrix& x) const {
    if (use_factor_) return factor_ * (factor_.transpose() * x);
    return m_ * x;
  }

  double value(const Matrix& x) const override {
    if (use_factor_) return -(factor_.transpose() * x).squaredNorm() + offset_;
    return -(x.cwiseProduct(m_ * x)).sum() + offset_;
  }
  Matrix gradient(const Matrix& x) const override { return -2.0 * apply_m(x); }
  Matrix hessian_apply(const Matrix& /*x*/, const Matrix& d) const override {
    return -2.0 * apply_m(d);
  }
  ObjectiveKind kind() const override { return ObjectiveKind::QuadraticForm; }

  bool has_factor() const noexcept { return use_factor_; }
  const Matrix& factor() const noexcept { return factor_; }
  const Matrix& m() const noexcept { return m_; }

  /// Principal submatrix M[rows, rows] applied to a vector on those rows.
  Vector apply_principal(const std::vector<Index>& rows, const Vector& v) const {
    const Index s = Index(rows.size());
    if (use_factor_) {
      Vector w = Vector::Zero(factor_.cols());
      for (Index a = 0; a < s; ++a) w += v(a) * factor_.row(rows[a]).transpose();
      Vector out(s);
      for (Index a = 0; a < s; ++a) out(a) = factor_.row(rows[a]).dot(w);
      return out;
    }
    Vector out = Vector::Zero(s);
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b) out(a) += m_(rows[a], rows[b]) * v(b);
    return out;
  }

 private:
  QuadraticFormObjective() = default;

  Matrix m_;
  Matrix factor_;
  bool use_factor_ = false;
  double offset_ = 0.0;
};

/// Objective that is identically zero.
class ZeroObjective : public Objective {
 public:
  double value(const Matrix&) const override { return 0.0; }
  Matrix gradient(const Matrix& x) const override { return Matrix::Zero(x.rows(), x.cols()); }
  Matrix hessian_apply(const Matrix& x, const Matrix&) const override {
    return Matrix::Zero(x.rows(), x.cols());
  }
  ObjectiveKind kind() const override { return ObjectiveKind::Linear; }
  double gradient_lipschitz() const override { return 0.0; }
};

}  // namespace ep4orth
