#include "rdest/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rdest {

namespace {

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree) +
                                " (max " + std::to_string(kMaxQuadratureDegree) + ")");
  }
}

// n-point Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

LineRule make_line_rule(int degree) {
  const int n = degree / 2 + 1;
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(n, x, w);
  LineRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (x[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

// s = u, t = v (1 - u); Jacobian (1 - u) adds one degree in u.
QuadratureRule make_triangle_rule(int degree) {
  const int n = (degree + 2) / 2 + 1;
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (x[j] + 1.0);
      const double s = u;
      const double t = v * (1.0 - u);
      rule.points.push_back({1.0 - s - t, s, t});
      // 0.25 from the interval maps, 2 normalises the reference area 1/2.
      rule.weights.push_back(0.5 * w[i] * w[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree) {
  check_degree(degree);
  static std::vector<QuadratureRule> cache = [] {
    std::vector<QuadratureRule> rules;
    for (int d = 0; d <= kMaxQuadratureDegree; ++d) rules.push_back(make_triangle_rule(d));
    return rules;
  }();
  return cache[degree];
}

const LineRule& line_rule(int degree) {
  check_degree(degree);
  static std::vector<LineRule> cache = [] {
    std::vector<LineRule> rules;
    for (int d = 0; d <= kMaxQuadratureDegree; ++d) rules.push_back(make_line_rule(d));
    return rules;
  }();
  return cache[degree];
}

double integrate_barycentric(double area, int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw std::invalid_argument("negative barycentric exponent");
  // a! b! c! / (a+b+c+2)! accumulated as a product of ratios.
  double value = 2.0 * area;
  int top = a + b + c + 2;
  for (int exps : {a, b, c}) {
    for (int k = 1; k <= exps; ++k) value *= static_cast<double>(k) / top--;
  }
  while (top > 1) value /= top--;
  return value;
}

double triangle_area(const Triangle& t) {
  const Point u = t[1] - t[0];
  const Point v = t[2] - t[0];
  return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

}  // namespace rdest
