#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ep4orth;

TEST(GenProjection, StructureAndHypothesis) {
  for (double xi : {0.0, 0.5, 0.9, 1.0}) {
    const ProjectionInstance inst = gen_projection(30, 4, xi, 9);
    EXPECT_LE(feasibility_violation(inst.x_star), 1e-14);
    EXPECT_LE((inst.c - inst.x_star * inst.l.transpose()).norm(), 1e-15);
    for (Index i = 0; i < 4; ++i) {
      EXPECT_GE(inst.l(i, i), 0.5);
      EXPECT_LE(inst.l(i, i), 3.5);
      for (Index j = 0; j < 4; ++j)
        if (i != j) {
          EXPECT_GE(inst.l(i, j), 0.0);
          EXPECT_LE(inst.l(i, j), xi * std::sqrt(inst.l(i, i) * inst.l(j, j)) + 1e-15);
        }
    }
  }
}

TEST(GenProjection, ZeroXiTargetIsScaledSolution) {
  const ProjectionInstance inst = gen_projection(20, 3, 0.0, 1);
  EXPECT_LE((round_to_feasible(project_oblique_plus_raw(inst.c)).x - inst.x_star).norm(), 1e-14);
  EXPECT_THROW(gen_projection(5, 2, 1.5, 0), Error);
}

TEST(Projection, SmallExampleMatchesEnumeration) {
  Matrix c(3, 2);
  c << 2.0, 0.5, 0.5, 3.0, 0.0, 0.0;
  const Matrix id = Matrix::Identity(3, 2);
  for (const Matrix& y : oracle::pattern_optima(c))
    if ((y - id).norm() > 1e-12) EXPECT_LT(c.cwiseProduct(y).sum(), c.cwiseProduct(id).sum());
  LinearObjective f = projection_objective(c);
  const SolveReport rep = ep4orth_solve(f, PenaltyContext(3, 2), presets::projection(),
                                        round_to_feasible(project_oblique_plus_raw(c)).x, c);
  EXPECT_LE((rep.x - id).norm(), 1e-12);
}

TEST(Projection, ObjectiveEqualsSquaredDistanceOnOblique) {
  Rng rng(2);
  const Matrix c = rng.normal_matrix(7, 3);
  const LinearObjective f = projection_objective(c);
  for (int t = 0; t < 5; ++t) {
    const Matrix x = oracle::random_interior(7, 3, rng);
    EXPECT_NEAR(f.value(x), (x - c).squaredNorm(), 1e-12);
  }
}

TEST(Gap, Examples) {
  const ProjectionInstance inst = gen_projection(10, 2, 0.5, 3);
  EXPECT_EQ(gap(inst.x_star, inst.x_star, inst.c), 0.0);
  const Matrix far = inst.c + 1.1 * (inst.x_star - inst.c);
  EXPECT_NEAR(gap(far, inst.x_star, inst.c), 0.1, 1e-12);
  Matrix swapped = inst.x_star;
  swapped.col(0).swap(swapped.col(1));
  EXPECT_GT(gap(swapped, inst.x_star, inst.c), 0.0);
  EXPECT_THROW(gap(inst.c, inst.c, inst.c), Error);
}

TEST(GenOnmf, NoiselessDataIsExplainedByB) {
  const OnmfInstance inst = gen_onmf(40, 30, 4, 0.0, 5);
  EXPECT_NEAR(inst.a.norm(), 1.0, 1e-14);
  EXPECT_GE(inst.a.minCoeff(), 0.0);
  EXPECT_LE(resi(inst.a, inst.b), 1e-12);
  EXPECT_EQ(inst.labels, row_argmax_labels(inst.b));
  const OnmfInstance noisy = gen_onmf(40, 30, 4, 0.1, 5);
  EXPECT_NEAR((noisy.a - inst.a).norm(), 0.1, 1e-14);
}

TEST(OnmfY, FeasibleXGivesProjectedCorrelation) {
  Rng rng(4);
  const Matrix x = random_nonneg_stiefel(12, 3, rng);
  const Matrix a = rng.normal_matrix(12, 8);
  EXPECT_LE((onmf_gauss_newton_Y(a, x) - (a.transpose() * x).cwiseMax(0.0)).norm(), 1e-12);
  EXPECT_LE((onmf_gauss_newton_Y(x, x) - Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(OnmfY, MatchesLeastSquaresOracle) {
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    const Matrix x = oracle::random_interior(15, 4, rng);
    const Matrix a = rng.uniform_matrix(15, 9);
    const Matrix yt = x.colPivHouseholderQr().solve(a);
    EXPECT_LE((onmf_gauss_newton_Y(a, x) - yt.transpose().cwiseMax(0.0)).norm(), 1e-10);
  }
}

TEST(OnmfObjectives, GaussNewtonModelAgreesWithDefinition) {
  Rng rng(6);
  const Matrix a = rng.uniform_matrix(10, 6);
  OnmfGaussNewtonObjective f(a);
  const Matrix x = oracle::random_interior(10, 2, rng);
  EXPECT_THROW(f.value(x), Error);
  f.begin_outer_iteration(x);
  const Matrix z = oracle::random_interior(10, 2, rng);
  EXPECT_NEAR(f.value(z), (a - z * f.y().transpose()).squaredNorm(), 1e-12);
  const OpnmfObjective g(a);
  EXPECT_NEAR(g.value(z), (a - z * z.transpose() * a).squaredNorm(), 1e-12);
}

TEST(Resi, Examples) {
  Rng rng(7);
  const Matrix x = random_nonneg_stiefel(9, 3, rng);
  EXPECT_LE(resi(x * rng.uniform_matrix(3, 5), x), 1e-14);
  EXPECT_EQ(resi(Matrix::Zero(9, 5), x), 0.0);
  const Matrix a = (x.col(0) + 2.0 * x.col(1)) * Matrix::Ones(1, 4);
  EXPECT_LE(resi(a, x), 1e-14);
  Matrix merged(9, 2);
  merged.col(0) = (x.col(0) + x.col(1)).normalized();
  merged.col(1) = x.col(2);
  EXPECT_GT(resi(a, merged), 0.1);
  EXPECT_THROW(resi(a, 2.0 * x), Error);
}

TEST(Metrics, Examples) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  ClusteringMetrics m = clustering_metrics(truth, truth, 3);
  EXPECT_EQ(m.purity, 1.0);
  EXPECT_EQ(m.entropy, 0.0);
  EXPECT_NEAR(m.nmi, 1.0, 1e-15);

  m = clustering_metrics({0, 0, 1, 1}, {0, 1, 0, 1}, 2);
  EXPECT_EQ(m.purity, 0.5);
  EXPECT_NEAR(m.entropy, 1.0, 1e-15);
  EXPECT_NEAR(m.nmi, 0.0, 1e-15);

  EXPECT_THROW(clustering_metrics({0, 3}, {0, 1}, 2), Error);
  EXPECT_THROW(clustering_metrics({0}, {0, 1}, 2), Error);
}

TEST(Metrics, PermutationInvarianceAndPurityEntropy) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> truth(30), pred(30);
    for (auto& v : truth) v = int(rng.below(4));
    for (auto& v : pred) v = int(rng.below(4));
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<int> relabeled(30);
    for (std::size_t i = 0; i < 30; ++i) relabeled[i] = perm[std::size_t(pred[i])];
    const ClusteringMetrics a = clustering_metrics(pred, truth, 4);
    const ClusteringMetrics b = clustering_metrics(relabeled, truth, 4);
    EXPECT_NEAR(a.purity, b.purity, 1e-15);
    EXPECT_NEAR(a.entropy, b.entropy, 1e-15);
    EXPECT_NEAR(a.nmi, b.nmi, 1e-15);
    EXPECT_GE(a.nmi, 0.0);
    EXPECT_LE(a.nmi, 1.0 + 1e-15);
    // A predicted cluster refining the truth is pure: entropy 0 and purity 1.
    std::vector<int> refine(30);
    for (std::size_t i = 0; i < 30; ++i) refine[i] = truth[i];
    const ClusteringMetrics c = clustering_metrics(refine, truth, 4);
    EXPECT_EQ(c.entropy, 0.0);
    EXPECT_EQ(c.purity, 1.0);
    EXPECT_EQ(a.entropy == 0.0, a.purity == 1.0);
  }
}

TEST(Sad, Examples) {
  Matrix y(3, 2);
  y << 1, 0, 0, 1, 1, 1;
  EXPECT_NEAR(sad(y, y), 0.0, 1e-7);
  EXPECT_NEAR(sad(2.0 * y, y), 0.0, 1e-7);
  Matrix swapped = y;
  swapped.col(0).swap(swapped.col(1));
  EXPECT_NEAR(sad(swapped, y), 0.0, 1e-7);
  const Matrix e1 = Matrix::Identity(2, 1);
  Matrix e2 = Matrix::Zero(2, 1);
  e2(1, 0) = 1.0;
  EXPECT_NEAR(sad(e2, e1), std::numbers::pi / 2.0, 1e-15);
  EXPECT_THROW(sad(Matrix::Zero(2, 1), e1), Error);
}

TEST(KIndicators, IndicatorFeaturesAreRecovered) {
  std::vector<int> truth;
  Rng rng(9);
  const Matrix b = random_nonneg_stiefel(60, 4, rng, &truth);
  Matrix u = (b.array() > 0.0).cast<double>().matrix();
  for (Index j = 0; j < 4; ++j) u.col(j).normalize();
  const KIndicatorsResult res = kindicators_solve(u, presets::kindicators(4));
  EXPECT_EQ(clustering_metrics(res.labels, truth, 4).purity, 1.0);
  EXPECT_LE(res.report.feasi, 1e-12);
  EXPECT_LE((res.y.transpose() * res.y - Matrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(KIndicators, YUpdateIsPolarFactor) {
  std::vector<int> lab;
  const Matrix u = gen_kindicators_features(50, 3, 0.2, 3, &lab);
  const KIndicatorsObjective f(u);
  const Matrix x0 = project_oblique_plus_raw(u);
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * x0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  EXPECT_LE((f.y_update(x0) - svd.matrixU() * svd.matrixV().transpose()).norm(), 1e-12);
  EXPECT_NEAR(f.value(x0), (u * f.y_update(x0) - x0).squaredNorm(), 1e-12);
  EXPECT_LE((u.transpose() * u - Matrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_THROW(kindicators_solve(2.0 * u, presets::kindicators(3)), Error);
}

TEST(RemoveDegenerate, DropsZeroRowsAndColumns) {
  Matrix a(3, 3);
  a << 1, 0, 2, 0, 0, 0, 3, 0, 4;
  std::vector<Index> rows, cols;
  const Matrix r = remove_degenerate(a, &rows, &cols);
  EXPECT_EQ(r, (Matrix(2, 2) << 1, 2, 3, 4).finished());
  EXPECT_EQ(rows, (std::vector<Index>{0, 2}));
  EXPECT_EQ(cols, (std::vector<Index>{0, 2}));
}

TEST(OnmfSolve, NoiselessRecovery) {
  const OnmfInstance inst = gen_onmf(60, 80, 3, 0.0, 12);
  const OnmfResult res = onmf_solve(inst.a, 3, presets::onmf());
  EXPECT_LE(res.report.feasi, 1e-12);
  EXPECT_LE(res.resi, 1e-8);
  EXPECT_NEAR(clustering_metrics(res.labels, inst.labels, 3).nmi, 1.0, 1e-12);
  Matrix neg = inst.a;
  neg(0, 0) = -1.0;
  EXPECT_THROW(onmf_solve(neg, 3, presets::onmf()), Error);
}
