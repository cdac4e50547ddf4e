#pragma once

#include "ep4orth/manifold.hpp"
#include "ep4orth/objective.hpp"
#include "ep4orth/simplex.hpp"

#include <functional>

namespace ep4orth {

using LinearOperator = std::function<Matrix(const Matrix&)>;

struct QPConfig {
  int max_iter = 100;
  double tol = 1e-10;
  int cg_max_iter = 200;
  double zero_tolerance = 1e-10;
  double sufficient_reduction = 0.9;  // accept a Newton step when ||F|| drops by this factor
  int max_halvings = 4;
};

struct QPResult {
  Matrix d;                 // Z - X, with Z in Delta(X)
  double residual = 0.0;    // ||F(Z)||_F at the returned point
  int iterations = 0;
  bool max_iter_reached = false;
};

namespace detail {

/// HS-Jacobian projection P_C(H) = Xi(H) - Xi(X) M for the active mask of Pi_Delta(C).
struct ActiveProjector {
  const Matrix& x;
  Eigen::MatrixXd mask;  // 1 where [Pi_Delta(C)]_ij > tol
  Vector xi_x_norm2;     // x_j^T Xi[x_j]

  Matrix operator()(const Matrix& h) const {
    Matrix out = h.cwiseProduct(mask);
    for (Index j = 0; j < x.cols(); ++j) {
      if (xi_x_norm2(j) <= 0.0) continue;
      const double m = x.col(j).dot(out.col(j)) / xi_x_norm2(j);
      out.col(j) -= m * x.col(j).cwiseProduct(mask.col(j));
    }
    return out;
  }
};

inline ActiveProjector make_active_projector(const Matrix& x, const Matrix& projected, double tol) {
  ActiveProjector p{x, (projected.array() > tol).cast<double>().matrix(), Vector(x.cols())};
  for (Index j = 0; j < x.cols(); ++j) p.xi_x_norm2(j) = x.col(j).cwiseProduct(p.mask.col(j)).dot(x.col(j));
  return p;
}

/// Truncated CG on the subspace range(P) for P B P v = b; stops on negative curvature.
inline Matrix projected_cg(const ActiveProjector& proj, const LinearOperator& b_op, const Matrix& rhs,
                           int max_iter, double rel_tol) {
  Matrix v = Matrix::Zero(rhs.rows(), rhs.cols());
  Matrix r = proj(rhs);
  Matrix p = r;
  double rr = r.squaredNorm();
  const double stop = rel_tol * rel_tol * rr;
  for (int it = 0; it < max_iter && rr > stop && rr > 0.0; ++it) {
    const Matrix ap = proj(b_op(p));
    const double curv = p.cwiseProduct(ap).sum();
    if (!(curv > 0.0)) break;
    const double a = rr / curv;
    v += a * p;
    r -= a * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return v;
}

}  // namespace detail

/// Residual map F(Z) = Z - Pi_Delta(X)(Z - alpha (g + B[Z - X])); also returns the projection.
inline Matrix qp_residual(const Matrix& x, const Matrix& g, const LinearOperator& b_op, double alpha,
                          const Matrix& z, Matrix* projected = nullptr) {
  const Matrix c = z - alpha * (g + b_op(z - x));
  Matrix p = project_delta_columns(x, c);
  Matrix f = z - p;
  if (projected != nullptr) *projected = std::move(p);
  return f;
}

/// Semi-smooth Newton for min_{D in T(X)} <g, D> + 1/2 <D, B[D]>, written over
/// Z = X + D in Delta(X). Each Newton step solves the HS-Jacobian system by
/// splitting H into its range(P_C) part (CG) and the complementary part
/// (closed form); steps that do not cut ||F|| by the configured factor are
/// blended back toward the fixed-point step Z - F(Z).
inline QPResult solve_qp_subproblem(const Matrix& x, const Matrix& g, const LinearOperator& b_op, double alpha,
                                    const QPConfig& cfg = {}) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "solve_qp_subproblem: alpha must be positive");
  QPResult res;
  Matrix proj;
  Matrix z = project_delta_columns(x, x - alpha * g);
  Matrix f = qp_residual(x, g, b_op, alpha, z, &proj);
  double fn = f.norm();

  int it = 0;
  for (; it < cfg.max_iter && fn > cfg.tol; ++it) {
    const detail::ActiveProjector pc = detail::make_active_projector(x, proj, cfg.zero_tolerance);
    // J[H] = H - P_C(H - alpha B[H]) = -F  <=>  (I - P_C) H = -(I - P_C) F,  alpha P_C B H = -P_C F.
    const Matrix pf = pc(f);
    const Matrix h2 = -(f - pf);
    const Matrix rhs = -pf / alpha - pc(b_op(h2));
    const Matrix h1 = detail::projected_cg(pc, b_op, rhs, cfg.cg_max_iter, std::min(1e-2, fn));
    const Matrix newton_step = h1 + h2;

    Matrix best_proj;
    Matrix z_try = z + newton_step;
    Matrix f_try = qp_residual(x, g, b_op, alpha, z_try, &best_proj);
    double fn_try = f_try.norm();
    double t = 1.0;
    for (int halve = 0; halve < cfg.max_halvings && !(fn_try <= cfg.sufficient_reduction * fn); ++halve) {
      t *= 0.5;
      z_try = z + t * newton_step - (1.0 - t) * f;
      f_try = qp_residual(x, g, b_op, alpha, z_try, &best_proj);
      fn_try = f_try.norm();
    }
    if (!(fn_try <= cfg.sufficient_reduction * fn)) {
      // Fixed-point step Z <- Pi_Delta(C(Z)).
      z_try = proj;
      f_try = qp_residual(x, g, b_op, alpha, z_try, &best_proj);
      fn_try = f_try.norm();
    }
    z = std::move(z_try);
    f = std::move(f_try);
    proj = std::move(best_proj);
    fn = fn_try;
  }
  res.iterations = it;
  res.max_iter_reached = fn > cfg.tol;
  res.residual = fn;
  res.d = proj - x;  // Pi_Delta(C(Z)) stays exactly in Delta(X)
  return res;
}

struct NewtonTrial;

struct NewtonConfig {
  double eta1 = 0.01;
  double eta2 = 0.9;
  double beta0 = 0.98;
  double beta1 = 1.0;
  double beta2 = 1.3;
  double tau0 = 1.0;
  double c1 = 0.1;
  double c2 = 0.5;
  double kappa_hat = 10.0;
  double kappa_max = 1e12;
  int max_iter = 200;
  double tol = 1e-8;        // ||X - Pi_+(X - grad h(X))||_F
  double step_tol = 0.0;    // optional: stop when an accepted step is this short
  int max_tau_raises = 8;   // direction-condition retries before the gradient fallback
  QPConfig qp;
  std::function<void(const Matrix& x, const Matrix& y, const NewtonTrial&)> on_trial;  // audit hook
};

/// Record of one accepted or rejected trial; used to audit the decrease contract.
struct NewtonTrial {
  double model_value = 0.0;      // m_l(Y^l)
  double required = 0.0;         // -a/(kappa + tau) ||Pi_T(-grad h)||^2
  double rho = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  bool accepted = false;
  bool fallback_direction = false;
};

struct NewtonResult {
  Matrix x;
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool curvature_exhausted = false;
  int accepted = 0;
  int rejected = 0;
  int direction_fallbacks = 0;
  int curvature_raises = 0;
  int qp_solves = 0;
  int qp_max_iter_hits = 0;
  std::vector<NewtonTrial> trials;
};

/// First-order stationarity residual ||X - max(X - grad h(X), 0)||_F.
inline double stationarity_residual(const Matrix& x, const Matrix& rgrad) {
  return (x - (x - rgrad).cwiseMax(0.0)).norm();
}

/// Checks <grad h, D> <= -c1 ||Pi_T(-grad h)|| ||D||.
inline bool direction_condition(const Matrix& rgrad, const Matrix& d, double pt_norm, double c1) {
  const double dn = d.norm();
  return dn > 0.0 && rgrad.cwiseProduct(d).sum() <= -c1 * pt_norm * dn;
}

namespace detail {

/// Largest |eigenvalue| of B on the tangent space at X, by power iteration.
inline double tangent_operator_norm(const Matrix& x, const LinearOperator& b_op, int iters = 20) {
  Matrix v(x.rows(), x.cols());
  for (Index j = 0; j < v.cols(); ++j)
    for (Index i = 0; i < v.rows(); ++i) v(i, j) = std::sin(double(1 + i + 7 * j));
  auto tangent = [&](Matrix m) {
    for (Index j = 0; j < m.cols(); ++j) m.col(j) -= x.col(j).dot(m.col(j)) * x.col(j);
    return m;
  };
  v = tangent(v);
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double vn = v.norm();
    if (vn == 0.0) break;
    v /= vn;
    Matrix w = tangent(b_op(v));
    est = w.norm();
    v = std::move(w);
  }
  return est;
}

}  // namespace detail

/// Adaptive quadratically regularized Newton method over OB^{n,k}_+.
inline NewtonResult newton_solve(const Objective& h, const Matrix& x0, const NewtonConfig& cfg) {
  NewtonResult res;
  Matrix x = x0;
  double hx = h.value(x);
  double tau = cfg.tau0;
  double kappa = cfg.kappa_hat;

  const double a_const = 2.0 * cfg.c1 * cfg.c1 * cfg.c2 * (1.0 - cfg.c2);

  for (int l = 0; l < cfg.max_iter; ++l) {
    const Matrix g = h.gradient(x);
    const Matrix rg = riemannian_grad(x, g);
    res.residual = stationarity_residual(x, rg);
    if (res.residual <= cfg.tol) {
      res.converged = true;
      break;
    }
    const Matrix pt = project_tangent_T(x, -rg);
    const double pt_norm = pt.norm();
    if (pt_norm == 0.0) {
      res.converged = true;
      break;
    }

    auto model = [&](const Matrix& y, double tau_now) {
      const Matrix s = y - x;
      return g.cwiseProduct(s).sum() + 0.5 * s.cwiseProduct(h.hessian_apply(x, s)).sum() +
             0.5 * tau_now * s.squaredNorm();
    };

    // Newton direction from the QP; raise tau until the direction condition holds.
    Matrix d;
    bool fallback = false;
    for (int attempt = 0;; ++attempt) {
      const LinearOperator b_op = [&, tau](const Matrix& v) -> Matrix {
        return riemannian_hess_apply(x, g, h.hessian_apply(x, v), v, false) + tau * v;
      };
      const double bnorm = detail::tangent_operator_norm(x, b_op);
      const double alpha = 1.0 / std::max(1.1 * bnorm, 1e-12);
      QPResult qp = solve_qp_subproblem(x, rg, b_op, alpha, cfg.qp);
      ++res.qp_solves;
      if (qp.max_iter_reached) ++res.qp_max_iter_hits;
      if (direction_condition(rg, qp.d, pt_norm, cfg.c1)) {
        d = std::move(qp.d);
        break;
      }
      if (attempt >= cfg.max_tau_raises) {
        d = pt;
        fallback = true;
        ++res.direction_fallbacks;
        break;
      }
      tau *= cfg.beta2;
    }

    // Trial point: the Newton point or the explicitly stepped projection,
    // whichever has the smaller model value; kappa grows until the decrease
    // contract holds.
    Matrix y;
    double m_y = 0.0;
    double required = 0.0;
    bool satisfied = false;
    for (int round = 0; round < 2 && !satisfied; ++round) {
      if (round == 1) {
        // Gradient fallback: satisfies the direction condition with c1 = 1.
        d = pt;
        fallback = true;
        ++res.direction_fallbacks;
      }
      const double d_norm = d.norm();
      const Matrix y_full = project_oblique_plus_raw(x + d);
      const double m_full = model(y_full, tau);
      while (kappa <= cfg.kappa_max) {
        required = -a_const / (kappa + tau) * pt_norm * pt_norm;
        const double step = 2.0 * cfg.c1 * (1.0 - cfg.c2) * pt_norm / ((kappa + tau) * d_norm);
        const Matrix y_cauchy = project_oblique_plus_raw(x + step * d);
        const double m_cauchy = model(y_cauchy, tau);
        if (m_full <= m_cauchy) {
          y = y_full;
          m_y = m_full;
        } else {
          y = y_cauchy;
          m_y = m_cauchy;
        }
        if (m_y <= required && m_y < 0.0) {
          satisfied = true;
          break;
        }
        kappa *= 2.0;
        ++res.curvature_raises;
      }
      if (!satisfied) {
        res.curvature_exhausted = true;
        kappa = cfg.kappa_hat;
      }
    }
    res.iterations = l + 1;
    if (!satisfied) break;

    const double hy = h.value(y);
    const double rho = (hy - hx) / m_y;
    NewtonTrial trial{m_y, required, rho, tau, kappa, rho >= cfg.eta1, fallback};
    if (cfg.on_trial) cfg.on_trial(x, y, trial);
    res.trials.push_back(trial);

    const double moved = (y - x).norm();
    if (rho >= cfg.eta1) {
      x = std::move(y);
      hx = hy;
      ++res.accepted;
    } else {
      ++res.rejected;
    }
    if (rho >= cfg.eta2) {
      tau *= cfg.beta0;
    } else if (rho >= cfg.eta1) {
      tau *= cfg.beta1;
    } else {
      tau *= cfg.beta2;
    }
    if (trial.accepted && moved <= cfg.step_tol) {
      res.converged = true;
      break;
    }
  }
  if (res.converged || res.iterations == cfg.max_iter) {
    res.residual = stationarity_residual(x, riemannian_grad(x, h.gradient(x)));
    res.converged = res.converged || res.residual <= cfg.tol;
  }
  res.x = std::move(x);
  res.value = hx;
  return res;
}

}  // namespace ep4orth
