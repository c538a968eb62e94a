#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rdest/adapt.hpp"

namespace rdest {
namespace {

TEST(Dorfler, EqualIndicators) {
  const std::vector<double> e(100, 0.3);
  EXPECT_EQ(dorfler_mark_vertices(e, 0.5).size(), 25u);
  EXPECT_EQ(dorfler_mark_vertices(e, 0.9999).size(), 100u);
}

TEST(Dorfler, DominantVertex) {
  // Vertex 7 carries 99% of the sum of squares.
  std::vector<double> e(10, 0.0);
  for (double& v : e) v = std::sqrt(0.01 / 9.0);
  e[7] = std::sqrt(0.99);
  EXPECT_EQ(dorfler_mark_vertices(e, 0.5), std::vector<int>{7});
}

TEST(Dorfler, SumConditionAndMinimality) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> d(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> e(50);
    for (double& v : e) v = d(rng);
    const double theta = 0.2 + 0.035 * trial;
    const auto marked = dorfler_mark_vertices(e, theta);
    double total = 0.0;
    for (double v : e) total += v * v;
    double sum = 0.0;
    double smallest = 1e300;
    for (int z : marked) {
      sum += e[z] * e[z];
      smallest = std::min(smallest, e[z] * e[z]);
    }
    EXPECT_GE(sum, theta * theta * total);
    // Dropping the smallest marked vertex breaks the condition.
    EXPECT_LT(sum - smallest, theta * theta * total);
  }
}

TEST(Dorfler, Errors) {
  EXPECT_THROW((void)dorfler_mark_vertices(std::vector<double>{}, 0.5), std::invalid_argument);
  EXPECT_THROW((void)dorfler_mark_vertices(std::vector<double>{1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW((void)dorfler_mark_vertices(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST(Dorfler, MarksWholeStars) {
  const Mesh m = rectangle_mesh(2, Diagonal::kCrissCross);
  std::vector<double> e(m.num_vertices(), 0.0);
  e[4] = 1.0;
  const auto elements = dorfler_mark(m, e, 0.5);
  const auto star_elements = m.vertex_elements(4);
  EXPECT_EQ(elements.size(), star_elements.size());
}

TEST(AdaptiveLoop, SingleIterationBelowInitialDofs) {
  const Mesh m = rectangle_mesh(4, Diagonal::kCrissCross);
  AdaptOptions o;
  o.max_dof = 1;
  const RunReport r = adaptive_loop(m, make_problem("sinsin", 1.0), o);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_FALSE(r.aborted);
}

TEST(AdaptiveLoop, SmoothProblemRate) {
  AdaptOptions o;
  o.max_dof = 4000;
  o.oscillation_every = 0;
  const RunReport r = adaptive_loop(rectangle_mesh(2, Diagonal::kCrissCross), make_problem("sinsin", 1.0), o);
  ASSERT_GE(r.iterations.size(), 6u);
  // Least squares slope of log(estimator) against log(dofs).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(r.iterations.size());
  int increases = 0;
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    const auto& it = r.iterations[i];
    const double x = std::log(it.dofs);
    const double y = std::log(it.estimator);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    EXPECT_TRUE(std::isfinite(it.estimator));
    if (i > 0) {
      EXPECT_GT(it.dofs, r.iterations[i - 1].dofs);
      if (it.estimator > r.iterations[i - 1].estimator) ++increases;
    }
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_GT(slope, -0.65);
  EXPECT_LT(slope, -0.35);
  EXPECT_LE(increases, static_cast<int>(r.iterations.size()) / 10 + 1);
}

TEST(AdaptiveLoop, InvalidMarkingParameter) {
  AdaptOptions o;
  o.theta_mark = 1.0;
  EXPECT_THROW((void)adaptive_loop(rectangle_mesh(2, Diagonal::kRight), make_problem("sinsin", 1.0), o),
               std::invalid_argument);
}

TEST(Study, SingleKappaHasUnitSpread) {
  AdaptOptions o;
  o.max_dof = 200;
  const std::vector<double> kappas{10.0};
  const StudyReport s = robustness_study(rectangle_mesh(2, Diagonal::kCrissCross), "sinsin", kappas, o);
  EXPECT_FALSE(s.reference_proxy);
  ASSERT_FALSE(s.rows.empty());
  double lo = 1e300, hi = 0;
  for (const StudyRow& row : s.rows) {
    lo = std::min(lo, row.effectivity);
    hi = std::max(hi, row.effectivity);
  }
  EXPECT_DOUBLE_EQ(s.effectivity_spread, hi / lo);
}

TEST(Study, ReferenceProxyWithoutExactSolution) {
  AdaptOptions o;
  o.max_dof = 150;
  const std::vector<double> kappas{1.0, 30.0};
  const StudyReport s = robustness_study(rectangle_mesh(2, Diagonal::kCrissCross), "const1", kappas, o);
  EXPECT_TRUE(s.reference_proxy);
  for (const StudyRow& row : s.rows) {
    EXPECT_GT(row.error, 0.0);
    EXPECT_GT(row.effectivity, 0.0);
  }
}

TEST(Study, NestedDistanceOfIdenticalFunctionsIsZero) {
  const Mesh coarse = rectangle_mesh(3, Diagonal::kRight);
  const Mesh fine = refine_uniform(coarse);
  const Problem p = make_problem("sinsin", 1.0);
  const DiscreteFunction uc = solve_galerkin(assemble_operator(coarse, 1.0), assemble_load(coarse, p.rhs, 8), 1e-12);
  // The coarse function interpolated onto the fine mesh.
  DiscreteFunction uf;
  uf.coefficients.resize(fine.num_free_vertices());
  for (int d = 0; d < fine.num_free_vertices(); ++d) {
    const Point& x = fine.vertex(fine.dof_vertex(d));
    double value = 0.0;
    for (int t = 0; t < coarse.num_elements(); ++t) {
      const auto l = coarse.barycentric(t, x);
      if (std::min({l[0], l[1], l[2]}) >= -1e-12) {
        value = uc.evaluate(coarse, t, x);
        break;
      }
    }
    uf.coefficients[d] = value;
  }
  EXPECT_LT(nested_energy_distance(coarse, uc, fine, uf, 1.0), 1e-12);
}

TEST(BoundaryBand, Fraction) {
  const Mesh m = rectangle_mesh(4, Diagonal::kRight);
  std::vector<int> all(m.num_elements());
  std::iota(all.begin(), all.end(), 0);
  // Centroids of the inner 2x2 cells are at least 1/4 + 1/12 from the boundary.
  EXPECT_NEAR(boundary_band_fraction(m, all, 0.25), 24.0 / 32.0, 1e-15);
  EXPECT_EQ(boundary_band_fraction(m, std::vector<int>{}, 0.25), 0.0);
}

}  // namespace
}  // namespace rdest
