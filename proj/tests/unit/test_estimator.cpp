#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rdest/estimator.hpp"

namespace rdest {
namespace {

DiscreteFunction random_function(const Mesh& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DiscreteFunction v;
  v.coefficients.resize(m.num_free_vertices());
  for (int d = 0; d < m.num_free_vertices(); ++d) v.coefficients[d] = u(rng);
  return v;
}

DiscreteFunction galerkin(const Mesh& m, const Problem& p) {
  return solve_galerkin(assemble_operator(m, p.kappa), assemble_load(m, p.rhs, 8), 1e-13);
}

TEST(Estimator, DiscreteDataHasZeroResidual) {
  const Mesh m = lshape_mesh(3);
  std::mt19937_64 rng(1);
  for (double kappa : {1.0, 1e2, 1e4}) {
    const DiscreteFunction u = random_function(m, rng);
    const TildeSFunctional lu = apply_L_to_discrete(m, kappa, u);
    const DualSystem duals(m, kappa);
    const ResidualData rd = residuals(m, kappa, u, duals.project(lu));
    const double scale = kappa * kappa;
    for (const auto& r : rd.element) {
      for (double v : r) EXPECT_LT(std::abs(v), 1e-10 * scale);
    }
    for (double j : rd.face) EXPECT_LT(std::abs(j), 1e-10 * scale);
  }
}

TEST(Estimator, ZeroSolutionResidualIsProjection) {
  const Mesh m = rectangle_mesh(3, Diagonal::kRight);
  const Problem p = make_problem("sinsin", 2.0);
  const DualSystem duals(m, p.kappa);
  const TildeSFunctional pi = duals.project(p.rhs);
  const ResidualData rd = residuals(m, p.kappa, DiscreteFunction{Eigen::VectorXd::Zero(m.num_free_vertices())}, pi);
  for (int t = 0; t < m.num_elements(); ++t) {
    for (int i = 0; i < 3; ++i) EXPECT_EQ(rd.element[t][i], pi.density[t][i]);
  }
  for (int f = 0; f < m.num_faces(); ++f) {
    if (!m.face(f).boundary()) EXPECT_EQ(rd.face[f], pi.face[f]);
  }
}

TEST(Estimator, VertexIndicatorSingleElement) {
  // |T| = 1 and h_T = 2; r = l_z gives |r|_T^2 = |T| / 6.
  const Mesh m({{0, 0}, {std::sqrt(2.0), 0}, {0, std::sqrt(2.0)}}, {{0, 1, 2}});
  ASSERT_NEAR(m.area(0), 1.0, 1e-15);
  ResidualData rd;
  rd.element = {{1.0, 0.0, 0.0}};
  rd.face.assign(m.num_faces(), 0.0);
  const double e2 = vertex_indicator(m, 0, rd, 2.0);
  EXPECT_NEAR(e2, 0.5 * std::sqrt(1.0 / 6.0), 1e-15);
  EXPECT_NEAR(vertex_indicator(m, 0, rd, 1.0), 2.0 * e2, 1e-15);
  rd.element = {{0.0, 0.0, 0.0}};
  EXPECT_EQ(vertex_indicator(m, 0, rd, 1.0), 0.0);
}

TEST(Estimator, VertexIndicatorFacePart) {
  // Only a jump on one interior face: sqrt(min{h_F, 1/kappa} j^2 |F|).
  const Mesh m({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
  ResidualData rd;
  rd.element.assign(2, {0.0, 0.0, 0.0});
  rd.face.assign(m.num_faces(), 0.0);
  int f = 0;
  while (m.face(f).boundary()) ++f;
  rd.face[f] = 3.0;
  const double len = std::sqrt(2.0);
  EXPECT_NEAR(vertex_indicator(m, 0, rd, 0.1), std::sqrt(len * 9.0 * len), 1e-14);
  EXPECT_NEAR(vertex_indicator(m, 0, rd, 10.0), std::sqrt(0.1 * 9.0 * len), 1e-14);
  EXPECT_EQ(vertex_indicator(m, 1, rd, 1.0), 0.0);
}

TEST(Estimator, DualNormOfOperatorImageIsEnergyNorm) {
  const Mesh m = lshape_mesh(2);
  const double kappa = 3.0;
  const SparseMatrix a = assemble_operator(m, kappa);
  for (int d = 0; d < m.num_free_vertices(); ++d) {
    const int z = m.dof_vertex(d);
    DiscreteFunction hat{Eigen::VectorXd::Zero(m.num_free_vertices())};
    hat.coefficients[d] = 1.0;
    ResidualFunctional g;
    g.add_operator_of(hat, kappa);
    for (int depth : {0, 1, 2}) {
      EXPECT_NEAR(discrete_dual_norm(m, star(m, z), g, kappa, depth), std::sqrt(a.coeff(d, d)), 1e-10);
    }
  }
}

TEST(Estimator, DualNormEdgeCases) {
  const Mesh m = rectangle_mesh(2, Diagonal::kCrissCross);
  ResidualFunctional empty;
  EXPECT_EQ(discrete_dual_norm(m, star(m, 4), empty, 1.0, 2), 0.0);
  const ScalarField zero = [](const Point&) { return 0.0; };
  ResidualFunctional g;
  g.add_field(zero);
  EXPECT_EQ(discrete_dual_norm(m, star(m, 4), g, 1.0, 2), 0.0);
  EXPECT_THROW((void)discrete_dual_norm(m, star(m, 4), g, 1.0, -1), std::invalid_argument);
}

TEST(Estimator, DualNormIncreasesWithDepth) {
  const Mesh m = rectangle_mesh(4, Diagonal::kCrissCross);
  const Problem p = make_problem("sinsin", 5.0);
  const DiscreteFunction u = galerkin(m, p);
  ResidualFunctional g;
  g.add_field(p.rhs).add_operator_of(u, p.kappa, -1.0);
  for (int z = 0; z < m.num_vertices(); z += 3) {
    const Star s = star(m, z);
    const double d1 = discrete_dual_norm(m, s, g, p.kappa, 1);
    const double d2 = discrete_dual_norm(m, s, g, p.kappa, 2);
    const double d3 = discrete_dual_norm(m, s, g, p.kappa, 3);
    EXPECT_LE(d1, d2 * (1 + 1e-12));
    EXPECT_LE(d2, d3 * (1 + 1e-12));
    EXPECT_LE(d3 - d2, d2 - d1 + 1e-14);
  }
}

TEST(Estimator, OscillationVanishesForDiscreteData) {
  const Mesh m = lshape_mesh(2);
  std::mt19937_64 rng(4);
  for (double kappa : {1.0, 1e2}) {
    const DiscreteFunction v = random_function(m, rng);
    const TildeSFunctional lv = apply_L_to_discrete(m, kappa, v);
    const DualSystem duals(m, kappa);
    const TildeSFunctional pi = duals.project(lv);
    ResidualFunctional g;
    g.add_tilde(lv).add_tilde(pi, -1.0);
    for (int z = 0; z < m.num_vertices(); ++z) {
      EXPECT_LT(discrete_dual_norm(m, star(m, z), g, kappa, 2), 1e-9);
    }
  }
}

TEST(Estimator, SmoothOscillationDecaysFasterThanEstimator) {
  const Problem p = make_problem("sinsin", 1.0);
  std::vector<double> osc;
  std::vector<double> est;
  for (int n : {4, 8, 16}) {
    const Mesh m = rectangle_mesh(n, Diagonal::kRight);
    const IndicatorReport r = estimate(m, p, galerkin(m, p));
    osc.push_back(r.global_oscillation);
    est.push_back(r.estimator);
  }
  for (std::size_t i = 1; i < osc.size(); ++i) {
    EXPECT_GT(osc[i - 1], osc[i]);
    EXPECT_LT(osc[i] / osc[i - 1], est[i] / est[i - 1]);
  }
}

TEST(Estimator, ClassicIndicatorConstantData) {
  const Mesh m = rectangle_mesh(2, Diagonal::kRight);
  const DiscreteFunction zero{Eigen::VectorXd::Zero(m.num_free_vertices())};
  const ScalarField c = [](const Point&) { return 3.0; };
  for (double kappa : {1.0, 100.0}) {
    for (int t = 0; t < m.num_elements(); ++t) {
      const double w = std::min(m.diameter(t), 1.0 / kappa);
      EXPECT_NEAR(classic_indicator(m, t, c, zero, kappa), w * w * 9.0 * m.area(t), 1e-14);
    }
  }
}

// With f = L(U) the new residuals vanish while the classical element
// residual f_T - kappa^2 U does not.
TEST(Estimator, DiscreteDataContrast) {
  const Mesh m = rectangle_mesh(3, Diagonal::kCrissCross);
  const double kappa = 2.0;
  std::mt19937_64 rng(8);
  const DiscreteFunction u = random_function(m, rng);
  const DualSystem duals(m, kappa);
  const ResidualData rd = residuals(m, kappa, u, duals.project(apply_L_to_discrete(m, kappa, u)));
  double ours = 0.0;
  double classic = 0.0;
  for (int z = 0; z < m.num_vertices(); ++z) ours += std::pow(vertex_indicator(m, z, rd, kappa), 2);
  for (int t = 0; t < m.num_elements(); ++t) {
    const ScalarField f = [&](const Point& x) { return kappa * kappa * u.evaluate(m, t, x); };
    classic += classic_indicator(m, t, f, u, kappa);
  }
  EXPECT_LT(std::sqrt(ours), 1e-9);
  EXPECT_GT(std::sqrt(classic), 1e-2);
}

TEST(Estimator, LocalizationOfGalerkinResidual) {
  const Mesh m = rectangle_mesh(4, Diagonal::kCrissCross);
  for (double kappa : {1.0, 1e2, 1e4}) {
    const Problem p = make_problem("sinsin", kappa);
    const DiscreteFunction u = galerkin(m, p);
    ResidualFunctional g;
    g.add_field(p.rhs).add_operator_of(u, kappa, -1.0);
    const LocalizationResult r = localize_check(m, kappa, g, 2);
    EXPECT_GT(r.global, 0.0);
    EXPECT_GE(r.local_sum / r.global, 0.2);
    EXPECT_LE(r.local_sum / r.global, 20.0);
  }
}

TEST(Estimator, LocalizationRejectsNonOrthogonalFunctionals) {
  const Mesh m = rectangle_mesh(2, Diagonal::kCrissCross);
  const ScalarField one = [](const Point&) { return 1.0; };
  ResidualFunctional g;
  g.add_field(one);
  EXPECT_THROW((void)localize_check(m, 1.0, g, 1), std::invalid_argument);
  const LocalizationResult zero = localize_check(m, 1.0, ResidualFunctional{}, 1);
  EXPECT_EQ(zero.global, 0.0);
  EXPECT_EQ(zero.local_sum, 0.0);
}

TEST(Estimator, ReportAggregatesLocals) {
  const Mesh m = lshape_mesh(2);
  const Problem p = make_problem("sinsin", 10.0);
  const IndicatorReport r = estimate(m, p, galerkin(m, p));
  double e = 0.0;
  for (double v : r.indicator) {
    EXPECT_GE(v, 0.0);
    e += v * v;
  }
  EXPECT_NEAR(r.estimator, std::sqrt(e), 1e-14 * r.estimator);
  double o = 0.0;
  for (double v : r.oscillation) o += v * v;
  EXPECT_NEAR(r.global_oscillation, std::sqrt(o), 1e-14 * r.global_oscillation);
  ASSERT_TRUE(r.true_error && r.effectivity);
  EXPECT_NEAR(*r.effectivity, std::hypot(r.estimator, r.global_oscillation) / *r.true_error, 1e-12);
  double local = 0.0;
  for (double v : r.local_error) local += v * v;
  // Every element is counted once per vertex.
  EXPECT_NEAR(local, 3.0 * *r.true_error * *r.true_error, 1e-10 * local);
}

}  // namespace
}  // namespace rdest
