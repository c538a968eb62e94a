#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "rdest/quadrature.hpp"

namespace rdest {
namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

TEST(Quadrature, FactorialFormula) {
  EXPECT_DOUBLE_EQ(integrate_barycentric(1.0, 0, 0, 0), 1.0);
  EXPECT_NEAR(integrate_barycentric(1.0, 1, 1, 1), 1.0 / 60.0, 1e-16);
  EXPECT_NEAR(integrate_barycentric(1.0, 3, 1, 1), 1.0 / 420.0, 1e-16);
  EXPECT_NEAR(integrate_barycentric(0.5, 2, 0, 0), 0.5 / 6.0, 1e-16);
}

TEST(Quadrature, WeightsSumToOne) {
  for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
    double s = 0.0;
    for (double w : triangle_rule(d).weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-14) << "degree " << d;
    EXPECT_GE(triangle_rule(d).degree, d);
  }
  EXPECT_THROW((void)triangle_rule(-1), std::invalid_argument);
  EXPECT_THROW((void)triangle_rule(kMaxQuadratureDegree + 1), std::invalid_argument);
}

TEST(Quadrature, ConstantAndBubble) {
  const Triangle t{Point(0.2, 0.1), Point(1.3, 0.4), Point(0.5, 1.7)};
  const double area = triangle_area(t);
  EXPECT_NEAR(gauss_simplex(t, 0, [](const Point&) { return 1.0; }), area, 1e-15);
  EXPECT_NEAR(gauss_simplex(t, 3, [](const std::array<double, 3>& l) { return l[0] * l[1] * l[2]; }),
              integrate_barycentric(area, 1, 1, 1), 1e-15);
}

// x^4 y^4 on the reference triangle: with x = l1, y = l2 the factorial
// formula gives 2 * (1/2) * 4! 4! / 10!.
TEST(Quadrature, ReferenceMonomialX4Y4) {
  const Triangle ref{Point(0, 0), Point(1, 0), Point(0, 1)};
  const double exact = factorial(4) * factorial(4) / factorial(10);
  const double value = gauss_simplex(ref, 8, [](const Point& x) { return std::pow(x.x(), 4) * std::pow(x.y(), 4); });
  EXPECT_NEAR(value, exact, 1e-13 * exact);
}

TEST(Quadrature, AllMonomialsOnRandomTriangles) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Triangle t{Point(u(rng), u(rng)), Point(u(rng), u(rng)), Point(u(rng), u(rng))};
    if (std::abs(triangle_area(t)) < 1e-2) continue;
    const double area = std::abs(triangle_area(t));
    const int degree = 2 + trial % 18;
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        const int c = degree - a - b;
        const double exact = integrate_barycentric(area, a, b, c);
        const double value = gauss_simplex(t, degree, [&](const std::array<double, 3>& l) {
          return std::pow(l[0], a) * std::pow(l[1], b) * std::pow(l[2], c);
        });
        EXPECT_NEAR(value, exact, 1e-13 * exact) << a << ' ' << b << ' ' << c;
      }
    }
  }
}

TEST(Quadrature, AffineInvariance) {
  const Triangle ref{Point(0, 0), Point(1, 0), Point(0, 1)};
  const Point a(0.3, -0.2);
  Eigen::Matrix2d m;
  m << 1.5, 0.4, -0.3, 0.9;
  const Triangle t{a, a + m.col(0), a + m.col(1)};
  const auto f = [](const Point& x) { return std::exp(x.x()) * std::cos(x.y()); };
  const double direct = gauss_simplex(t, 14, f);
  const double pulled = std::abs(m.determinant()) * gauss_simplex(ref, 14, [&](const Point& x) { return f(a + m * x); });
  EXPECT_NEAR(direct, pulled, 1e-14);
}

TEST(Quadrature, EdgeRules) {
  const Point a(0.1, 0.2);
  const Point b(1.1, 2.7);
  const double len = (b - a).norm();
  EXPECT_NEAR(gauss_edge(a, b, 0, [](double) { return 1.0; }), len, 1e-15);
  EXPECT_NEAR(gauss_edge(a, b, 2, [](double s) { return s * (1 - s); }), len / 6.0, 1e-15);
  EXPECT_NEAR(gauss_edge(a, b, 3, [](double s) { return s * s * s; }), len / 4.0, 1e-15);
  for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
    EXPECT_NEAR(gauss_edge(Point(0, 0), Point(1, 0), d, [&](double s) { return std::pow(s, d); }), 1.0 / (d + 1),
                1e-14);
  }
}

}  // namespace
}  // namespace rdest
