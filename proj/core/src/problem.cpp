#include "rdest/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdest {

namespace {

using std::numbers::pi;

Problem sinsin(double kappa) {
  Problem p;
  p.name = "sinsin";
  p.kappa = kappa;
  const double factor = 2.0 * pi * pi + kappa * kappa;
  p.rhs = [factor](const Point& x) {
    return factor * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  p.exact = ExactSolution{
      [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); },
      [](const Point& x) {
        return Point(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                     pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
      }};
  return p;
}

Problem const1(double kappa) {
  Problem p;
  p.name = "const1";
  p.kappa = kappa;
  p.rhs = [](const Point&) { return 1.0; };
  return p;
}

// Exponentials are written relative to the nearer end so nothing overflows.
struct LayerProfile {
  double kappa;
  [[nodiscard]] double value(double t) const {
    const double denom = 1.0 + std::exp(-kappa);
    return 1.0 - (std::exp(-kappa * t) + std::exp(-kappa * (1.0 - t))) / denom;
  }
  [[nodiscard]] double derivative(double t) const {
    const double denom = 1.0 + std::exp(-kappa);
    return kappa * (std::exp(-kappa * t) - std::exp(-kappa * (1.0 - t))) / denom;
  }
};

Problem layer1d(double kappa) {
  Problem p;
  p.name = "layer1d";
  p.kappa = kappa;
  const LayerProfile w{kappa};
  p.rhs = [w, kappa](const Point& x) {
    const double wx = w.value(x.x());
    const double wy = w.value(x.y());
    return kappa * kappa * (wx + wy - wx * wy);
  };
  p.exact = ExactSolution{
      [w](const Point& x) { return w.value(x.x()) * w.value(x.y()); },
      [w](const Point& x) {
        return Point(w.derivative(x.x()) * w.value(x.y()), w.value(x.x()) * w.derivative(x.y()));
      }};
  return p;
}

}  // namespace

const std::vector<std::string>& problem_presets() {
  static const std::vector<std::string> names{"sinsin", "const1", "layer1d"};
  return names;
}

Problem make_problem(std::string_view preset, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be positive and finite");
  }
  if (preset == "sinsin") return sinsin(kappa);
  if (preset == "const1") return const1(kappa);
  if (preset == "layer1d") return layer1d(kappa);
  throw std::invalid_argument("unknown problem preset '" + std::string(preset) + "'");
}

}  // namespace rdest
