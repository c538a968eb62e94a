#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdest/mesh.hpp"

namespace rdest {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

struct ExactSolution {
  ScalarField value;
  VectorField gradient;
};

/// -Laplace(u) + kappa^2 u = f in the domain, u = 0 on its boundary.
struct Problem {
  std::string name;
  double kappa = 1.0;
  ScalarField rhs;
  std::optional<ExactSolution> exact;
};

/// Named right-hand sides on the unit square:
///   sinsin  u = sin(pi x) sin(pi y), f = (2 pi^2 + kappa^2) u
///   const1  f = 1, no closed-form solution
///   layer1d u = w(x) w(y) with the 1D layer profile
///           w(t) = 1 - (e^{-kappa t} + e^{-kappa (1-t)}) / (1 + e^{-kappa}),
///           f = kappa^2 (w(x) + w(y) - w(x) w(y))
/// Throws std::invalid_argument for unknown names or kappa <= 0.
[[nodiscard]] Problem make_problem(std::string_view preset, double kappa);

[[nodiscard]] const std::vector<std::string>& problem_presets();

}  // namespace rdest
