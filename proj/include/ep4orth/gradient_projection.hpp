#pragma once

#include "ep4orth/manifold.hpp"
#include "ep4orth/objective.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>

namespace ep4orth {

struct GPConfig {
  enum class StepRule {
    NonmonotoneBB,  // BB step, clipped, with max-type nonmonotone Armijo backtracking
    Fixed,          // alpha = fixed_alpha / L, monotone for fixed_alpha < 1
    PalmBB,         // alpha = min(alpha_BB, palm_cap) / L without line search
  };

  StepRule rule = StepRule::NonmonotoneBB;
  double bb_floor = 1e-10;
  double bb_cap = 1e10;
  int window = 10;
  double delta = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 20;
  int max_iter = 2000;
  double tol = 1e-6;        // stop when ||X^{l+1} - X^l||_F <= tol
  double initial_step = 1.0;
  double fixed_alpha = 0.99;
  double palm_cap = 10.0;
  std::function<void(const Matrix&)> on_iterate;  // called with every accepted iterate
};

struct GPResult {
  Matrix x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failure = false;
};

/// Long BB step <S,S>/|<S,Z>|; +inf when <S,Z> = 0.
inline double bb_step_length(const Matrix& s, const Matrix& z) {
  const double sz = std::abs(s.cwiseProduct(z).sum());
  return sz > 0.0 ? s.squaredNorm() / sz : std::numeric_limits<double>::infinity();
}

namespace detail {

inline Matrix gp_project(const Matrix& c, const std::optional<Eigen::MatrixXi>& mask) {
  return mask ? project_oblique_plus_masked(c, *mask) : project_oblique_plus_raw(c);
}

}  // namespace detail

/// X^{l+1} = Pi_OB(X^l - alpha_l grad h(X^l)). The returned point never has a
/// larger objective than X0. With a mask the iteration stays on that support.
inline GPResult gradient_projection_solve(const Objective& h, const Matrix& x0, const GPConfig& cfg,
                                          const std::optional<Eigen::MatrixXi>& mask = std::nullopt) {
  GPResult res;
  Matrix x = x0;
  double hx = h.value(x);
  const double h0 = hx;
  Matrix g = h.gradient(x);
  if (mask) g = g.cwiseProduct(mask->cast<double>());

  double lipschitz = 1.0;
  if (cfg.rule != GPConfig::StepRule::NonmonotoneBB) {
    const double l = h.gradient_lipschitz();
    if (l < 0.0) throw Error(ErrorCode::InvalidParameter, "gradient_projection: fixed steps need a Lipschitz constant");
    lipschitz = l > 0.0 ? l : 1.0;
  }

  std::deque<double> recent{hx};
  double alpha = cfg.rule == GPConfig::StepRule::NonmonotoneBB ? cfg.initial_step : cfg.fixed_alpha;

  for (int it = 0; it < cfg.max_iter; ++it) {
    Matrix x_new;
    double h_new = 0.0;
    if (cfg.rule == GPConfig::StepRule::NonmonotoneBB) {
      const double ref = *std::max_element(recent.begin(), recent.end());
      double step = alpha;
      bool ok = false;
      for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
        x_new = detail::gp_project(x - step * g, mask);
        h_new = h.value(x_new);
        const double moved = (x_new - x).squaredNorm();
        if (h_new <= ref - cfg.delta / (2.0 * step) * moved) {
          ok = true;
          break;
        }
        step *= cfg.backtrack;
      }
      if (!ok) {
        res.line_search_failure = true;
        res.iterations = it + 1;
        break;
      }
    } else {
      x_new = detail::gp_project(x - (alpha / lipschitz) * g, mask);
      h_new = h.value(x_new);
    }

    Matrix g_new = h.gradient(x_new);
    if (mask) g_new = g_new.cwiseProduct(mask->cast<double>());
    const Matrix s = x_new - x;
    const double s_norm = s.norm();
    const double bb = bb_step_length(s, g_new - g);

    x = std::move(x_new);
    g = std::move(g_new);
    if (cfg.on_iterate) cfg.on_iterate(x);
    hx = h_new;
    res.iterations = it + 1;
    recent.push_back(hx);
    if (int(recent.size()) > cfg.window) recent.pop_front();

    if (s_norm <= cfg.tol) {
      res.converged = true;
      break;
    }
    switch (cfg.rule) {
      case GPConfig::StepRule::NonmonotoneBB:
        alpha = std::clamp(bb, cfg.bb_floor, cfg.bb_cap);
        break;
      case GPConfig::StepRule::PalmBB:
        alpha = std::clamp(lipschitz * bb, cfg.bb_floor, cfg.palm_cap);
        break;
      case GPConfig::StepRule::Fixed:
        break;
    }
  }

  if (hx > h0) {
    res.x = x0;
    res.value = h0;
  } else {
    res.x = std::move(x);
    res.value = hx;
  }
  return res;
}

}  // namespace ep4orth
