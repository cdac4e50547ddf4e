#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ep4orth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  NegativeEntry,
  NonUnitColumn,
  BadShape,
  NotTangent,
  NonFiniteObjective,
  SingularCurvature,
  NotFeasible,
  InfeasibleSupport,
  EmptyColumnSupport,
  SingularGram,
  BadLabels,
  ZeroColumn,
  InvalidParameter,
  ParseError,
  DimensionMismatch,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NonUnitColumn: return "NonUnitColumn";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::SingularCurvature: return "SingularCurvature";
    case ErrorCode::NotFeasible: return "NotFeasible";
    case ErrorCode::InfeasibleSupport: return "InfeasibleSupport";
    case ErrorCode::EmptyColumnSupport: return "EmptyColumnSupport";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::BadLabels: return "BadLabels";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::BadShape, std::string(where) + ": shape mismatch " +
                                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                         " vs " + std::to_string(b.rows()) + "x" +
                                         std::to_string(b.cols()));
  }
}

/// A point of OB^{n,k}_+: nonnegative n x k matrix with unit-norm columns.
///
/// Construction validates and never repairs; the stored data is exactly the
/// input. Repairing an arbitrary matrix is the job of project_oblique_plus.
class ObliqueMatrix {
 public:
  static constexpr double kUnitTolerance = 1e-12;

  explicit ObliqueMatrix(Matrix data) : data_(std::move(data)) { validate(); }

  const Matrix& matrix() const noexcept { return data_; }
  operator const Matrix&() const noexcept { return data_; }  // NOLINT(google-explicit-constructor)

  Index n() const noexcept { return data_.rows(); }
  Index k() const noexcept { return data_.cols(); }

 private:
  void validate() const {
    const Index n = data_.rows();
    const Index k = data_.cols();
    if (k < 1 || n < k) {
      throw Error(ErrorCode::BadShape, "need n >= k >= 1, got " + std::to_string(n) + "x" +
                                           std::to_string(k));
    }
    if (!data_.allFinite()) throw Error(ErrorCode::BadShape, "non-finite entry");
    for (Index j = 0; j < k; ++j) {
      for (Index i = 0; i < n; ++i) {
        if (data_(i, j) < 0.0) {
          throw Error(ErrorCode::NegativeEntry,
                      "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is negative");
        }
      }
      const double norm = data_.col(j).norm();
      if (std::abs(norm - 1.0) > kUnitTolerance) {
        throw Error(ErrorCode::NonUnitColumn,
                    "column " + std::to_string(j) + " has norm " + std::to_string(norm));
      }
    }
  }

  Matrix data_;
};

inline ObliqueMatrix make_oblique(const Matrix& data) { return ObliqueMatrix(data); }

/// Problem dimensions plus the constant matrix V of the infeasibility measure
/// ||XV||_F^q - 1 and the extreme entries of VV^T.
class PenaltyContext {
 public:
  /// Default V = e / sqrt(k).
  PenaltyContext(Index n, Index k) : PenaltyContext(n, k, Matrix::Constant(k, 1, 1.0 / std::sqrt(double(k)))) {
    rank_one_uniform_ = true;
  }

  PenaltyContext(Index n, Index k, Matrix v) : n_(n), k_(k), v_(std::move(v)) {
    if (k_ < 1 || n_ < k_ || v_.rows() != k_ || v_.cols() < 1) {
      throw Error(ErrorCode::BadShape, "PenaltyContext: V must be k x r with n >= k >= 1");
    }
    if (std::abs(v_.norm() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidParameter, "PenaltyContext: ||V||_F must be 1");
    }
    vvt_ = v_ * v_.transpose();
    omega_min_ = vvt_.minCoeff();
    omega_max_ = vvt_.maxCoeff();
    if (!(omega_min_ > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "PenaltyContext: VV^T must be entrywise positive");
    }
    vvt_norm2_ = v_.squaredNorm() > 0 ? Eigen::JacobiSVD<Matrix>(v_).singularValues()(0) : 0.0;
    vvt_norm2_ *= vvt_norm2_;
  }

  Index n() const noexcept { return n_; }
  Index k() const noexcept { return k_; }
  const Matrix& V() const noexcept { return v_; }
  const Matrix& VVt() const noexcept { return vvt_; }
  double omega_min() const noexcept { return omega_min_; }
  double omega_max() const noexcept { return omega_max_; }
  /// Spectral norm of VV^T (at most 1 since ||V||_F = 1).
  double vvt_spectral_norm() const noexcept { return vvt_norm2_; }
  bool rank_one_uniform() const noexcept { return rank_one_uniform_; }

  /// X V V^T, using the all-ones/k fast path for the default V.
  Matrix times_vvt(const Matrix& x) const {
    if (rank_one_uniform_) {
      const Vector row_sum = x.rowwise().sum() / double(k_);
      return row_sum.replicate(1, k_);
    }
    return x * vvt_;
  }

 private:
  Index n_;
  Index k_;
  Matrix v_;
  Matrix vvt_;
  double omega_min_ = 0.0;
  double omega_max_ = 0.0;
  double vvt_norm2_ = 0.0;
  bool rank_one_uniform_ = false;
};

/// (sigma, p, q, eps) of the penalty f + sigma * (zeta_q + eps)^p.
struct PenaltyParams {
  double sigma = 1.0;
  double p = 1.0;
  double q = 2.0;
  double eps = 0.0;

  void validate() const {
    if (!(sigma > 0.0) || !(p > 0.0) || !(q > 0.0) || !(eps >= 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "PenaltyParams: need sigma, p, q > 0 and eps >= 0");
    }
    if (p >= 1.0 && eps != 0.0) {
      throw Error(ErrorCode::InvalidParameter, "PenaltyParams: eps must be 0 when p >= 1");
    }
  }
};

/// Support of X split into supp, zeros in nonzero rows, zeros in zero rows.
struct SupportPattern {
  using Entry = std::pair<Index, Index>;
  std::vector<Entry> supp;
  std::vector<Entry> omega0_prime;
  std::vector<Entry> omega0_dprime;
  double zero_tolerance = 1e-10;
};

inline SupportPattern support_pattern(const Matrix& x, double tol = 1e-10) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidParameter, "support_pattern: tol < 0");
  SupportPattern out;
  out.zero_tolerance = tol;
  for (Index i = 0; i < x.rows(); ++i) {
    bool row_nonzero = false;
    for (Index j = 0; j < x.cols(); ++j) row_nonzero = row_nonzero || std::abs(x(i, j)) > tol;
    for (Index j = 0; j < x.cols(); ++j) {
      if (std::abs(x(i, j)) > tol) {
        out.supp.emplace_back(i, j);
      } else if (row_nonzero) {
        out.omega0_prime.emplace_back(i, j);
      } else {
        out.omega0_dprime.emplace_back(i, j);
      }
    }
  }
  return out;
}

enum class Termination { FeasibilityTol, MaxOuter, Stalled };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::FeasibilityTol: return "feasibility-tol";
    case Termination::MaxOuter: return "max-outer";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

/// Record of one outer iteration of the penalty loop.
struct OuterRecord {
  int t = 0;
  double sigma = 0.0;
  double eps = 0.0;
  double eps_grad = 0.0;
  double penalty_feas = 0.0;     // P at the feasible anchor
  double penalty_start = 0.0;    // P at X^{t,0} after the anchor step
  double penalty_end = 0.0;      // P at X^t
  double zeta_start = 0.0;
  double zeta_end = 0.0;
  double kkt = 0.0;              // ||min(X^t, grad P(X^t))||_F
  bool anchored = false;
  bool second_order = false;
  int inner_iterations = 0;
};

/// Contract bookkeeping of the second-order subsolver.
struct NewtonStats {
  int accepted = 0;
  int rejected = 0;
  int trial_condition_violations = 0;   // accepted trials failing the decrease contract
  int direction_fallbacks = 0;          // QP direction replaced by projected gradient
  int curvature_raises = 0;
  int qp_solves = 0;
  int qp_max_iter_hits = 0;
};

struct SolveReport {
  Matrix x;                // final point (feasible after postprocessing)
  Matrix last_iterate;     // X^t of the last outer iteration, before rounding
  double objective = 0.0;  // f at x
  double zeta = 0.0;       // ||X V||_F^2 - 1 at the last penalty iterate
  double kkt = 0.0;
  double feasi = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double seconds = 0.0;
  Termination termination = Termination::MaxOuter;
  std::vector<OuterRecord> history;
  NewtonStats newton;
  bool subsolver_failure = false;
};

}  // namespace ep4orth
