#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ep4orth;

TEST(Driver, ProjectionPresetRecoversKnownSolution) {
  const ProjectionInstance inst = gen_projection(100, 5, 0.5, 1);
  LinearObjective f = projection_objective(inst.c);
  const PenaltyContext ctx(100, 5);
  const Matrix x0 = round_to_feasible(project_oblique_plus_raw(inst.c)).x;
  const SolveReport rep = ep4orth_solve(f, ctx, presets::projection(), x0, inst.c);
  EXPECT_EQ(rep.termination, Termination::FeasibilityTol);
  EXPECT_LE(std::abs(gap(rep.x, inst.x_star, inst.c)), 1e-10);
  EXPECT_LE(rep.feasi, 1e-12);
}

TEST(Driver, ZeroObjectiveEndsFeasible) {
  ZeroObjective f;
  const PenaltyContext ctx(15, 3);
  DriverConfig cfg;
  cfg.rng_seed = 4;
  const SolveReport rep = ep4orth_solve(f, ctx, cfg);
  EXPECT_LE(rep.feasi, 1e-12);
  EXPECT_LE(zeta(rep.x, ctx, 2.0), 1e-12);
  EXPECT_EQ(rep.objective, 0.0);
}

TEST(Driver, SigmaScheduleIsGeometric) {
  const ProjectionInstance inst = gen_projection(40, 4, 0.9, 2);
  LinearObjective f = projection_objective(inst.c);
  const PenaltyContext ctx(40, 4);
  DriverConfig cfg = presets::projection();
  cfg.tol_feas = 0.0;
  cfg.t_max = 4;
  const SolveReport rep = ep4orth_solve(f, ctx, cfg, inst.c, inst.c);
  ASSERT_EQ(rep.history.size(), 4u);
  EXPECT_NEAR(rep.history[3].sigma, 1.25, 1e-15);
  for (std::size_t t = 1; t < rep.history.size(); ++t) {
    EXPECT_GT(rep.history[t].sigma, rep.history[t - 1].sigma);
    EXPECT_LE(rep.history[t].eps_grad, rep.history[t - 1].eps_grad);
    EXPECT_GE(rep.history[t].eps_grad, cfg.eps_grad_min);
  }
}

TEST(Driver, OnmfScheduleDependsOnInfeasibility) {
  const DriverConfig cfg = presets::onmf();
  EXPECT_EQ(cfg.next_gamma2(2.5), 1.05);
  EXPECT_EQ(cfg.next_gamma2(1.5), 1.03);
}

TEST(Driver, DescentAndAnchorInvariants) {
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const OnmfInstance inst = gen_onmf(40, 60, 3, 0.1, 10 + std::uint64_t(t));
    const SolveReport rep = onmf_solve(inst.a, 3, presets::onmf()).report;
    ASSERT_FALSE(rep.history.empty());
    for (const OuterRecord& r : rep.history) {
      EXPECT_LE(r.penalty_end, r.penalty_start);
    }
    EXPECT_EQ(rep.newton.trial_condition_violations, 0);
  }
  const ProjectionInstance inst = gen_projection(30, 3, 0.7, 5);
  LinearObjective f = projection_objective(inst.c);
  const PenaltyContext ctx(30, 3);
  DriverConfig cfg = presets::projection();
  cfg.anchor = true;
  const SolveReport rep = ep4orth_solve(f, ctx, cfg, project_oblique_plus_raw(rng.uniform_matrix(30, 3)), inst.c);
  for (const OuterRecord& r : rep.history) {
    EXPECT_LE(r.penalty_start, r.penalty_feas);
    EXPECT_LE(r.penalty_end, r.penalty_start);
  }
}

TEST(Driver, BreaksBelowFeasibilityTolerance) {
  const OnmfInstance inst = gen_onmf(50, 80, 4, 0.01, 21);
  const SolveReport rep = onmf_solve(inst.a, 4, presets::onmf()).report;
  ASSERT_EQ(rep.termination, Termination::FeasibilityTol);
  EXPECT_LE(rep.history.back().zeta_end, presets::onmf().tol_feas);
}

TEST(Driver, RejectsInvalidConfig) {
  ZeroObjective f;
  const PenaltyContext ctx(4, 2);
  DriverConfig cfg;
  cfg.gamma2 = 1.0;
  EXPECT_THROW(ep4orth_solve(f, ctx, cfg), Error);
  cfg = DriverConfig{};
  cfg.eta = 1.0;
  EXPECT_THROW(ep4orth_solve(f, ctx, cfg), Error);
  cfg = DriverConfig{};
  cfg.t_max = 0;
  EXPECT_THROW(ep4orth_solve(f, ctx, cfg), Error);
}

TEST(FeasibleInit, HintAndSeed) {
  Rng rng(6);
  const Matrix xs = random_nonneg_stiefel(10, 3, rng);
  Rng unused(0);
  EXPECT_LE((feasible_init(10, 3, xs, unused).x - xs).norm(), 1e-15);

  const Matrix c = rng.normal_matrix(10, 3);
  EXPECT_EQ(feasible_init(10, 3, c, unused).x, round_to_feasible(project_oblique_plus_raw(c)).x);

  Rng a(77), b(77);
  const FeasiblePoint pa = feasible_init(10, 3, std::nullopt, a);
  const FeasiblePoint pb = feasible_init(10, 3, std::nullopt, b);
  EXPECT_EQ(pa.x, pb.x);
  EXPECT_LE(feasibility_violation(pa.x), 1e-12);
}

TEST(Postprocess, LinearClosedForm) {
  Rng rng(7);
  const Matrix c = rng.uniform_matrix(6, 2);
  const FeasiblePoint xr = round_to_feasible(project_oblique_plus_raw(rng.uniform_matrix(6, 2)));
  const LinearObjective f(-c);
  const FeasiblePoint out = postprocess(xr, f, ObjectiveKind::Linear);
  for (Index j = 0; j < 2; ++j) {
    Vector masked = c.col(j).cwiseProduct(xr.h.col(j).cast<double>());
    EXPECT_LE((out.x.col(j) - masked / masked.norm()).norm(), 1e-15);
  }
  EXPECT_LE(f.value(out.x), f.value(xr.x));
}

TEST(Postprocess, DiagonalQuadraticFormPicksLargestEntry) {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 1.0, 2.0, 3.0;
  const QuadraticFormObjective f = QuadraticFormObjective::from_matrix(m);
  FeasiblePoint xr;
  xr.x = Matrix::Constant(3, 1, 1.0 / std::sqrt(3.0));
  xr.h = sign_pattern(xr.x);
  const FeasiblePoint out = postprocess(xr, f, ObjectiveKind::QuadraticForm);
  EXPECT_LE((out.x - Matrix::Identity(3, 3).col(2)).norm(), 1e-12);
}

TEST(Postprocess, TwoByTwoPositiveMatrix) {
  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const QuadraticFormObjective f = QuadraticFormObjective::from_matrix(m);
  FeasiblePoint xr;
  xr.x = Matrix(2, 1);
  xr.x << 1.0, 1e-3;
  xr.x /= xr.x.norm();
  xr.h = sign_pattern(xr.x);
  const FeasiblePoint out = postprocess(xr, f, ObjectiveKind::QuadraticForm);
  EXPECT_NEAR(out.x(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(out.x(1, 0), 1.0 / std::sqrt(2.0), 1e-12);
  const Matrix lhs = (Matrix(2, 2) << std::sqrt(1.5), std::sqrt(0.5), std::sqrt(1.5), -std::sqrt(0.5)).finished();
  ASSERT_LE((lhs * lhs.transpose() - m).norm(), 1e-14);
  const FeasiblePoint out2 = postprocess(xr, QuadraticFormObjective::from_factor(lhs), ObjectiveKind::QuadraticForm);
  EXPECT_LE((out2.x - out.x).norm(), 1e-12);
}

TEST(Postprocess, GenericNeverIncreasesObjective) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const OpnmfObjective f(rng.uniform_matrix(10, 5));
    const FeasiblePoint xr = round_to_feasible(project_oblique_plus_raw(rng.uniform_matrix(10, 3)));
    const FeasiblePoint out = postprocess(xr, f, ObjectiveKind::Generic);
    EXPECT_LE(f.value(out.x), f.value(xr.x));
    EXPECT_LE(feasibility_violation(out.x), 1e-12);
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 3; ++j)
        if (xr.h(i, j) == 0) EXPECT_EQ(out.x(i, j), 0.0);
  }
}

TEST(Postprocess, EmptyColumnIsRejected) {
  FeasiblePoint xr;
  xr.x = Matrix::Zero(3, 2);
  xr.x(0, 0) = 1.0;
  xr.h = sign_pattern(xr.x);
  try {
    postprocess(xr, ZeroObjective{}, ObjectiveKind::Linear);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyColumnSupport);
  }
}
