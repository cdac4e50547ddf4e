#pragma once

#include "ep4orth/manifold.hpp"
#include "ep4orth/objective.hpp"
#include "ep4orth/types.hpp"

#include <algorithm>
#include <cmath>

namespace ep4orth {

/// Values cached at one point X; every derivative routine reuses the same s.
struct PenaltyEval {
  double value = 0.0;          // f(X) + sigma (zeta + eps)^p
  double f_value = 0.0;
  double zeta = 0.0;           // ||XV||_F^q - 1
  double s = 1.0;              // ||XV||_F
  double c = 0.0;              // p q (zeta + eps)^{p-1} s^{q-2}
  double c_prime_over_s = 0.0; // c'(s) / s
  bool curvature_singular = false;
};

inline double xv_norm(const Matrix& x, const PenaltyContext& ctx) {
  if (ctx.rank_one_uniform()) return x.rowwise().sum().norm() / std::sqrt(double(ctx.k()));
  return (x * ctx.V()).norm();
}

inline double zeta(const Matrix& x, const PenaltyContext& ctx, double q) {
  if (!(q > 0.0)) throw Error(ErrorCode::InvalidParameter, "zeta: q must be positive");
  return std::pow(xv_norm(x, ctx), q) - 1.0;
}

/// The scalars c and c'(s)/s of the penalty term at ||XV||_F = s.
inline void penalty_scalars(const PenaltyParams& prm, double s, double zeta_q, PenaltyEval& ev) {
  const double base = std::max(zeta_q, 0.0) + prm.eps;
  const double p = prm.p;
  const double q = prm.q;
  ev.c = p * q * (p == 1.0 ? 1.0 : std::pow(base, p - 1.0)) * std::pow(s, q - 2.0);
  // c'(s) = p q [ (p-1) (zeta+eps)^{p-2} q s^{2q-3} + (zeta+eps)^{p-1} (q-2) s^{q-3} ]
  double first = 0.0;
  ev.curvature_singular = false;
  if (p != 1.0) {
    if (base > 0.0) {
      first = (p - 1.0) * std::pow(base, p - 2.0) * q * std::pow(s, 2.0 * q - 3.0);
    } else if (p < 2.0) {
      ev.curvature_singular = true;
    }
  }
  const double second = (p == 1.0 ? 1.0 : std::pow(base, p - 1.0)) * (q - 2.0) * std::pow(s, q - 3.0);
  ev.c_prime_over_s = p * q * (first + second) / s;
}

inline PenaltyEval penalty_eval_with_f(const Matrix& x, const PenaltyContext& ctx,
                                       const PenaltyParams& prm, double f_value) {
  PenaltyEval ev;
  ev.f_value = f_value;
  if (!std::isfinite(f_value)) throw Error(ErrorCode::NonFiniteObjective, "penalty_value: f is not finite");
  ev.s = xv_norm(x, ctx);
  ev.zeta = std::pow(ev.s, prm.q) - 1.0;
  const double base = std::max(ev.zeta, 0.0) + prm.eps;
  ev.value = f_value + prm.sigma * std::pow(base, prm.p);
  penalty_scalars(prm, ev.s, ev.zeta, ev);
  return ev;
}

inline PenaltyEval penalty_value(const Matrix& x, const PenaltyContext& ctx, const PenaltyParams& prm,
                                 const Objective& f) {
  return penalty_eval_with_f(x, ctx, prm, f.value(x));
}

/// Euclidean gradient of P: G_f + sigma c X V V^T.
inline Matrix penalty_euclid_grad(const Matrix& x, const PenaltyContext& ctx, const PenaltyParams& prm,
                                  const PenaltyEval& ev, const Matrix& g_f) {
  return g_f + (prm.sigma * ev.c) * ctx.times_vvt(x);
}

/// grad P = grad f + sigma c X (Off(VV^T) - Diag((X^T X - I) VV^T)).
inline Matrix penalty_rgrad(const Matrix& x, const PenaltyContext& ctx, const PenaltyParams& prm,
                            const PenaltyEval& ev, const Matrix& g_f) {
  const Matrix& w = ctx.VVt();
  const Index k = x.cols();
  Matrix inner = w;
  inner.diagonal().setZero();
  const Matrix gram = x.transpose() * x - Matrix::Identity(k, k);
  for (Index j = 0; j < k; ++j) inner(j, j) = -gram.row(j).dot(w.col(j));
  return riemannian_grad(x, g_f) + (prm.sigma * ev.c) * (x * inner);
}

/// Euclidean Hessian of P applied to D:
/// H_f[D] + sigma (c D VV^T + (c'(s)/s) <X VV^T, D> X VV^T).
inline Matrix penalty_euclid_hess_apply(const Matrix& x, const PenaltyContext& ctx, const PenaltyParams& prm,
                                        const PenaltyEval& ev, const Matrix& hf_d, const Matrix& d) {
  if (ev.curvature_singular) {
    throw Error(ErrorCode::SingularCurvature, "penalty Hessian: zeta + eps = 0 with p < 2, p != 1");
  }
  Matrix out = hf_d + (prm.sigma * ev.c) * ctx.times_vvt(d);
  if (ev.c_prime_over_s != 0.0) {
    const Matrix xw = ctx.times_vvt(x);
    out += (prm.sigma * ev.c_prime_over_s * xw.cwiseProduct(d).sum()) * xw;
  }
  return out;
}

/// Riemannian Hessian of P applied to a tangent D.
inline Matrix penalty_rhess_apply(const Matrix& x, const PenaltyContext& ctx, const PenaltyParams& prm,
                                  const Objective& f, const PenaltyEval& ev, const Matrix& d) {
  const Matrix g = penalty_euclid_grad(x, ctx, prm, ev, f.gradient(x));
  const Matrix h = penalty_euclid_hess_apply(x, ctx, prm, ev, f.hessian_apply(x, d), d);
  return riemannian_hess_apply(x, g, h, d);
}

/// ||min(X, grad P(X))||_F.
inline double kkt_residual_subproblem(const Matrix& x, const PenaltyContext& ctx, const PenaltyParams& prm,
                                      const PenaltyEval& ev, const Matrix& g_f) {
  const Matrix rg = penalty_rgrad(x, ctx, prm, ev, g_f);
  return x.cwiseMin(rg).norm();
}

/// h = f + sigma (zeta_q + eps)^p as a plain objective for the subsolvers.
class PenaltyObjective : public Objective {
 public:
  PenaltyObjective(const Objective& f, const PenaltyContext& ctx, PenaltyParams prm)
      : f_(f), ctx_(ctx), prm_(prm) {
    prm_.validate();
  }

  PenaltyEval evaluate(const Matrix& x) const { return penalty_value(x, ctx_, prm_, f_); }

  double value(const Matrix& x) const override { return evaluate(x).value; }
  Matrix gradient(const Matrix& x) const override {
    const PenaltyEval ev = penalty_eval_with_f(x, ctx_, prm_, 0.0);
    return penalty_euclid_grad(x, ctx_, prm_, ev, f_.gradient(x));
  }
  Matrix hessian_apply(const Matrix& x, const Matrix& d) const override {
    const PenaltyEval ev = penalty_eval_with_f(x, ctx_, prm_, 0.0);
    return penalty_euclid_hess_apply(x, ctx_, prm_, ev, f_.hessian_apply(x, d), d);
  }

  /// Lipschitz constant of the penalty gradient for p = 1, q = 2 (2 sigma ||VV^T||_2)
  /// plus that of f; negative when unknown.
  double gradient_lipschitz() const override {
    const double lf = f_.gradient_lipschitz();
    if (lf < 0.0 || prm_.p != 1.0 || prm_.q != 2.0) return -1.0;
    return lf + 2.0 * prm_.sigma * ctx_.vvt_spectral_norm();
  }

  double kkt_residual(const Matrix& x) const {
    const PenaltyEval ev = evaluate(x);
    return kkt_residual_subproblem(x, ctx_, prm_, ev, f_.gradient(x));
  }

  const PenaltyParams& params() const noexcept { return prm_; }
  const PenaltyContext& context() const noexcept { return ctx_; }
  const Objective& base() const noexcept { return f_; }

 private:
  const Objective& f_;
  const PenaltyContext& ctx_;
  PenaltyParams prm_;
};

enum class Stationarity { Stationary, WeaklyStationary, Neither };

inline const char* to_string(Stationarity s) {
  switch (s) {
    case Stationarity::Stationary: return "stationary";
    case Stationarity::WeaklyStationary: return "weakly_stationary";
    case Stationarity::Neither: return "neither";
  }
  return "unknown";
}

struct StationarityReport {
  Stationarity kind = Stationarity::Neither;
  double support_violation = 0.0;  // max |grad f| on supp(X)
  double sign_violation = 0.0;     // max (-nabla f)_+ on zero rows
  double max_violation = 0.0;
};

/// Classifies a feasible point of the original problem: grad f = 0 on supp(X)
/// (weak stationarity) and additionally nabla f >= 0 on all-zero rows.
inline StationarityReport check_stationarity_original(const Matrix& x, const Objective& f, double tol = 1e-8,
                                                      double zero_tol = 1e-10) {
  const PenaltyContext ctx(x.rows(), x.cols());
  bool feasible = x.minCoeff() >= -zero_tol;
  for (Index j = 0; j < x.cols() && feasible; ++j) feasible = std::abs(x.col(j).norm() - 1.0) <= 1e-8;
  if (!feasible || zeta(x, ctx, 2.0) > 1e-10) {
    throw Error(ErrorCode::NotFeasible, "check_stationarity_original: point is not in S^{n,k}_+");
  }
  const Matrix g = f.gradient(x);
  const Matrix rg = riemannian_grad(x, g);
  const SupportPattern pat = support_pattern(x, zero_tol);
  StationarityReport out;
  for (const auto& [i, j] : pat.supp) out.support_violation = std::max(out.support_violation, std::abs(rg(i, j)));
  for (const auto& [i, j] : pat.omega0_dprime) out.sign_violation = std::max(out.sign_violation, -g(i, j));
  out.max_violation = std::max(out.support_violation, out.sign_violation);
  if (out.support_violation <= tol) {
    out.kind = out.sign_violation <= tol ? Stationarity::Stationary : Stationarity::WeaklyStationary;
  }
  return out;
}

}  // namespace ep4orth
