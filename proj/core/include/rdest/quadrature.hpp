#pragma once

#include <array>
#include <type_traits>
#include <vector>

#include "rdest/mesh.hpp"

namespace rdest {

using Triangle = std::array<Point, 3>;

/// Rule on the unit triangle. Points are barycentric, weights sum to one so
/// that integrals are |T| * sum_i w_i f(x_i).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Gauss-Legendre rule on [0, 1]; weights sum to one.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

inline constexpr int kMaxQuadratureDegree = 40;

/// Collapsed (Duffy) product Gauss rule exact for total degree <= degree.
/// Throws std::invalid_argument outside [0, kMaxQuadratureDegree].
[[nodiscard]] const QuadratureRule& triangle_rule(int degree);
[[nodiscard]] const LineRule& line_rule(int degree);

/// Exact value of the integral of l1^a l2^b l3^c over a triangle of the
/// given area: 2|T| a! b! c! / (a+b+c+2)!.
[[nodiscard]] double integrate_barycentric(double area, int a, int b, int c);

[[nodiscard]] double triangle_area(const Triangle& t);

/// Integrates fn over the triangle. fn may take either the physical point or
/// the barycentric coordinates (with respect to the given vertex order).
template <class Fn>
double gauss_simplex(const Triangle& tri, int degree, Fn&& fn) {
  const QuadratureRule& rule = triangle_rule(degree);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    const auto& l = rule.points[i];
    if constexpr (std::is_invocable_v<Fn, const std::array<double, 3>&>) {
      sum += rule.weights[i] * fn(l);
    } else {
      const Point x = l[0] * tri[0] + l[1] * tri[1] + l[2] * tri[2];
      sum += rule.weights[i] * fn(x);
    }
  }
  return triangle_area(tri) * sum;
}

/// Integrates fn along the segment [a, b]. fn may take the physical point or
/// the arclength fraction s in [0, 1] measured from a.
template <class Fn>
double gauss_edge(const Point& a, const Point& b, int degree, Fn&& fn) {
  const LineRule& rule = line_rule(degree);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    const double s = rule.points[i];
    if constexpr (std::is_invocable_v<Fn, double>) {
      sum += rule.weights[i] * fn(s);
    } else {
      sum += rule.weights[i] * fn(Point((1.0 - s) * a + s * b));
    }
  }
  return (b - a).norm() * sum;
}

}  // namespace rdest
