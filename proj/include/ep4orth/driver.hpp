#pragma once

#include "ep4orth/gradient_projection.hpp"
#include "ep4orth/newton.hpp"
#include "ep4orth/penalty.hpp"
#include "ep4orth/random.hpp"
#include "ep4orth/rounding.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdint>
#include <optional>

namespace ep4orth {

enum class SubsolverMode {
  Auto,         // gradient projection while zeta(X^{t,0}) > zeta_switch, Newton afterwards
  FirstOrder,   // gradient projection only
  SecondOrder,  // Newton only
};

struct DriverConfig {
  double sigma0 = 1.0;
  // sigma_{t+1} = gamma2 * sigma_t when ||X^t V||^2 > gamma2_switch, else gamma2_low * sigma_t.
  double gamma2 = 10.0;
  double gamma2_low = 10.0;
  double gamma2_switch = -std::numeric_limits<double>::infinity();
  double gamma1 = 0.0;
  double eps0 = 0.0;
  double p = 1.0;
  double q = 2.0;
  double eta = 0.8;
  double eps_grad0 = 1e-2;
  double eps_grad_min = 1e-7;
  double tol_feas = 1e-8;
  int t_max = 300;
  double zeta_switch = 0.0;
  std::uint64_t rng_seed = 0;
  SubsolverMode mode = SubsolverMode::Auto;
  GPConfig gp;
  NewtonConfig newton;
  bool postprocess = true;
  bool anchor = true;  // reset X^{t,0} to X^feas when P(X^{t,0}) > P(X^feas)

  void validate() const {
    if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidParameter, "DriverConfig: sigma0 must be positive");
    if (!(gamma2 > 1.0) || !(gamma2_low > 1.0)) throw Error(ErrorCode::InvalidParameter, "DriverConfig: gamma2 must exceed 1");
    if (!(gamma1 >= 0.0 && gamma1 < 1.0)) throw Error(ErrorCode::InvalidParameter, "DriverConfig: gamma1 must lie in [0, 1)");
    if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidParameter, "DriverConfig: eta must lie in (0, 1)");
    if (t_max < 1) throw Error(ErrorCode::InvalidParameter, "DriverConfig: t_max must be at least 1");
    if (!(eps_grad0 >= 0.0) || !(eps_grad_min >= 0.0)) throw Error(ErrorCode::InvalidParameter, "DriverConfig: negative tolerance");
    PenaltyParams{sigma0, p, q, eps0}.validate();
  }

  double next_gamma2(double xv2) const { return xv2 > gamma2_switch ? gamma2 : gamma2_low; }
};

namespace presets {

/// Projection onto S^{n,k}_+: fixed-step gradient projection (alpha = 0.99 / L),
/// started from the rounded target, without the feasible anchor.
inline DriverConfig projection() {
  DriverConfig c;
  c.sigma0 = 1e-2;
  c.gamma2 = c.gamma2_low = 5.0;
  c.eta = 0.8;
  c.tol_feas = 1e-8;
  c.zeta_switch = 0.0;
  c.mode = SubsolverMode::FirstOrder;
  c.gp.rule = GPConfig::StepRule::Fixed;
  c.gp.fixed_alpha = 0.99;
  c.gp.max_iter = 5000;
  c.eps_grad0 = 0.5;
  c.anchor = false;
  return c;
}

/// ONMF/OPNMF on general data.
inline DriverConfig onmf() {
  DriverConfig c;
  c.sigma0 = 1e-3;
  c.gamma2 = 1.05;
  c.gamma2_low = 1.03;
  c.gamma2_switch = 2.0;
  c.eta = 0.98;
  c.tol_feas = 1e-8;
  c.zeta_switch = 5.0;
  c.gp.max_iter = 500;
  c.newton.max_iter = 50;
  return c;
}

/// K-indicators: PALM-type steps min(alpha_BB, 10k) / L, without the feasible anchor.
inline DriverConfig kindicators(Index k) {
  DriverConfig c;
  c.sigma0 = 10.0;
  c.gamma2 = c.gamma2_low = 10.0;
  c.eta = 0.5;
  c.tol_feas = 0.1;
  c.mode = SubsolverMode::FirstOrder;
  c.gp.rule = GPConfig::StepRule::PalmBB;
  c.gp.fixed_alpha = 1.0;
  c.gp.palm_cap = 10.0 * double(k);
  c.gp.max_iter = 2000;
  c.anchor = false;
  return c;
}

}  // namespace presets

/// round(hint) when a hint is given, else round(Pi_OB(uniform random)).
inline FeasiblePoint feasible_init(Index n, Index k, const std::optional<Matrix>& hint, Rng& rng) {
  if (hint) {
    if (hint->rows() != n || hint->cols() != k) throw Error(ErrorCode::DimensionMismatch, "feasible_init: hint shape");
    return round_to_feasible(project_oblique_plus_raw(*hint));
  }
  return round_to_feasible(project_oblique_plus_raw(rng.uniform_matrix(n, k)));
}

namespace detail {

inline Eigen::MatrixXi check_support(const FeasiblePoint& xr) {
  for (Index j = 0; j < xr.h.cols(); ++j)
    if (xr.h.col(j).sum() == 0) throw Error(ErrorCode::EmptyColumnSupport, "postprocess: empty column in H^R");
  return xr.h;
}

/// Dominant eigenvector of M[S,S] on the support S of column j, made nonnegative.
inline Vector dominant_principal_eigvec(const QuadraticFormObjective& f, const std::vector<Index>& rows) {
  const Index s = Index(rows.size());
  Matrix sub(s, s);
  if (f.has_factor()) {
    Matrix fs(s, f.factor().cols());
    for (Index a = 0; a < s; ++a) fs.row(a) = f.factor().row(rows[a]);
    sub = fs * fs.transpose();
  } else {
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b) sub(a, b) = f.m()(rows[a], rows[b]);
    sub = 0.5 * (sub + sub.transpose()).eval();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
  Vector v = es.eigenvectors().col(s - 1).cwiseAbs();
  return v / v.norm();
}

}  // namespace detail

/// Refinement over the sign pattern of a rounded point. Linear objectives use
/// the column-wise closed form, quadratic forms the dominant eigenvector of
/// each principal submatrix, anything else gradient projection on the support.
/// The result is never worse than the input in f.
inline FeasiblePoint postprocess(const FeasiblePoint& xr, const Objective& f, ObjectiveKind kind) {
  const Eigen::MatrixXi mask = detail::check_support(xr);
  FeasiblePoint out;
  switch (kind) {
    case ObjectiveKind::Linear: {
      const Matrix c = -f.gradient(xr.x);
      out.x = project_oblique_plus_masked(c, mask);
      break;
    }
    case ObjectiveKind::QuadraticForm: {
      const auto* quad = dynamic_cast<const QuadraticFormObjective*>(&f);
      if (quad == nullptr) throw Error(ErrorCode::InvalidParameter, "postprocess: kind does not match objective");
      out.x = Matrix::Zero(xr.x.rows(), xr.x.cols());
      for (Index j = 0; j < mask.cols(); ++j) {
        std::vector<Index> rows;
        for (Index i = 0; i < mask.rows(); ++i)
          if (mask(i, j) != 0) rows.push_back(i);
        const Vector v = detail::dominant_principal_eigvec(*quad, rows);
        for (std::size_t a = 0; a < rows.size(); ++a) out.x(rows[a], j) = v(Index(a));
      }
      break;
    }
    case ObjectiveKind::Generic: {
      GPConfig cfg;
      cfg.tol = 1e-12;
      cfg.max_iter = 5000;
      out.x = gradient_projection_solve(f, xr.x, cfg, mask).x;
      break;
    }
  }
  if (!(f.value(out.x) <= f.value(xr.x))) out.x = xr.x;
  out.h = sign_pattern(out.x);
  return out;
}

/// Outer loop of the exact penalty method. f may refresh surrogate data in
/// begin_outer_iteration; refine, when given, replaces f in postprocessing.
inline SolveReport ep4orth_solve(Objective& f, const PenaltyContext& ctx, const DriverConfig& cfg,
                                 const std::optional<Matrix>& x0 = std::nullopt,
                                 const std::optional<Matrix>& feasible_hint = std::nullopt,
                                 const Objective* refine = nullptr) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Index n = ctx.n();
  const Index k = ctx.k();

  Rng rng(cfg.rng_seed);
  const FeasiblePoint feas = feasible_init(n, k, feasible_hint, rng);
  Matrix x = x0 ? project_oblique_plus_raw(*x0) : feas.x;
  if (x.rows() != n || x.cols() != k) throw Error(ErrorCode::DimensionMismatch, "ep4orth_solve: X0 shape");

  SolveReport rep;
  PenaltyParams prm{cfg.sigma0, cfg.p, cfg.q, cfg.eps0};
  double eps_grad = cfg.eps_grad0;
  rep.termination = Termination::MaxOuter;

  for (int t = 0; t < cfg.t_max; ++t) {
    OuterRecord rec;
    rec.t = t;
    rec.sigma = prm.sigma;
    rec.eps = prm.eps;
    rec.eps_grad = eps_grad;

    f.begin_outer_iteration(x);
    PenaltyObjective h(f, ctx, prm);
    rec.penalty_feas = h.value(feas.x);
    rec.penalty_start = h.value(x);
    if (cfg.anchor && rec.penalty_start > rec.penalty_feas) {
      x = feas.x;
      rec.anchored = true;
      f.begin_outer_iteration(x);
      rec.penalty_feas = rec.penalty_start = h.value(x);
    }
    rec.zeta_start = zeta(x, ctx, 2.0);

    bool second = false;
    switch (cfg.mode) {
      case SubsolverMode::Auto: second = !(rec.zeta_start > cfg.zeta_switch); break;
      case SubsolverMode::FirstOrder: second = false; break;
      case SubsolverMode::SecondOrder: second = true; break;
    }
    rec.second_order = second;

    if (second) {
      NewtonConfig ncfg = cfg.newton;
      ncfg.tol = std::max(eps_grad, 1e-12);
      ncfg.step_tol = eps_grad;
      NewtonResult nr = newton_solve(h, x, ncfg);
      rec.inner_iterations = nr.iterations;
      rep.newton.accepted += nr.accepted;
      rep.newton.rejected += nr.rejected;
      rep.newton.direction_fallbacks += nr.direction_fallbacks;
      rep.newton.curvature_raises += nr.curvature_raises;
      rep.newton.qp_solves += nr.qp_solves;
      rep.newton.qp_max_iter_hits += nr.qp_max_iter_hits;
      for (const NewtonTrial& tr : nr.trials)
        if (tr.accepted && !(tr.model_value <= tr.required)) ++rep.newton.trial_condition_violations;
      if (nr.value <= rec.penalty_start) x = std::move(nr.x);
    } else {
      GPConfig gcfg = cfg.gp;
      gcfg.tol = eps_grad;
      GPResult gr = gradient_projection_solve(h, x, gcfg);
      rec.inner_iterations = gr.iterations;
      if (gr.line_search_failure) rep.subsolver_failure = true;
      x = std::move(gr.x);
    }
    rep.inner_iterations += rec.inner_iterations;

    const PenaltyEval ev = h.evaluate(x);
    rec.penalty_end = ev.value;
    rec.zeta_end = zeta(x, ctx, 2.0);
    rec.kkt = kkt_residual_subproblem(x, ctx, prm, ev, f.gradient(x));
    rep.history.push_back(rec);
    rep.outer_iterations = t + 1;
    rep.kkt = rec.kkt;

    if (rec.zeta_end <= cfg.tol_feas) {
      rep.termination = Termination::FeasibilityTol;
      break;
    }

    prm.eps *= cfg.gamma1;
    prm.sigma *= cfg.next_gamma2(rec.zeta_end + 1.0);
    eps_grad = std::max(cfg.eta * eps_grad, cfg.eps_grad_min);
    if (!std::isfinite(prm.sigma) || prm.sigma > 1e300) {
      rep.termination = Termination::Stalled;
      break;
    }
  }

  rep.zeta = zeta(x, ctx, 2.0);
  rep.last_iterate = x;
  const Objective& target = refine != nullptr ? *refine : f;
  FeasiblePoint xr = round_to_feasible(x);
  if (cfg.postprocess) xr = postprocess(xr, target, target.kind());
  rep.x = std::move(xr.x);
  rep.objective = target.value(rep.x);
  rep.feasi = feasibility_violation(rep.x);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace ep4orth
