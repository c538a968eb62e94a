#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdest/estimator.hpp"
#include "rdest/galerkin.hpp"
#include "rdest/mesh.hpp"
#include "rdest/problem.hpp"

namespace rdest {

/// Greedy Doerfler marking: the smallest prefix of the vertices sorted by
/// decreasing indicator with sum E^2 >= theta^2 sum E^2. Returns vertex
/// indices. Throws std::invalid_argument for an empty indicator set or
/// theta outside (0, 1).
[[nodiscard]] std::vector<int> dorfler_mark_vertices(std::span<const double> indicators, double theta);

/// Union of the stars of the Doerfler-marked vertices, sorted.
[[nodiscard]] std::vector<int> dorfler_mark(const Mesh& mesh, std::span<const double> indicators, double theta);

/// Fraction of the given elements whose centroid lies within `width` of the
/// domain boundary.
[[nodiscard]] double boundary_band_fraction(const Mesh& mesh, std::span<const int> elements, double width);

struct AdaptOptions {
  double theta_mark = 0.5;
  int max_dof = 10000;
  int max_iterations = 200;
  int quad_degree = 8;
  int dual_depth = 2;
  /// Oscillation is computed on iterations divisible by this (0 disables it).
  int oscillation_every = 1;
  double solver_tol = 1e-10;
  /// Width of the boundary band audited in every iteration record.
  std::optional<double> band_width;
};

struct IterationRecord {
  int iteration = 0;
  int dofs = 0;
  int elements = 0;
  double estimator = 0.0;
  std::optional<double> oscillation;
  std::optional<double> error;
  std::optional<double> effectivity;
  double classic_estimator = 0.0;
  int marked_elements = 0;
  std::optional<double> band_fraction;
  double seconds = 0.0;
};

struct RunReport {
  std::string problem;
  double kappa = 0.0;
  double theta_mark = 0.0;
  std::vector<IterationRecord> iterations;
  Mesh final_mesh;
  DiscreteFunction final_solution;
  std::vector<int> last_marked;
  bool aborted = false;
  std::string abort_reason;
};

/// Called after every estimate with the current mesh, solution and report.
using IterationObserver =
    std::function<void(const Mesh&, const DiscreteFunction&, const IndicatorReport&, const IterationRecord&)>;

/// SOLVE - ESTIMATE - MARK - REFINE until the dof count exceeds max_dof.
/// A solver failure ends the loop with a partial report (aborted = true).
[[nodiscard]] RunReport adaptive_loop(const Mesh& initial, const Problem& problem, const AdaptOptions& options,
                                      const IterationObserver& observer = {});

struct StudyRow {
  double kappa = 0.0;
  int iteration = 0;
  int dofs = 0;
  double estimator = 0.0;
  double oscillation = 0.0;
  double error = 0.0;
  double effectivity = 0.0;
  double classic_effectivity = 0.0;
};

struct StudyReport {
  std::string problem;
  std::vector<StudyRow> rows;
  /// max / min effectivity over all rows.
  double effectivity_spread = 1.0;
  double classic_spread = 1.0;
  /// True when errors come from a reference solution instead of u.
  bool reference_proxy = false;
};

/// Adaptive runs for every kappa with effectivity trajectories. Without an
/// exact solution the error of every iterate is measured against the
/// Galerkin solution on one uniform refinement of the final mesh.
[[nodiscard]] StudyReport robustness_study(const Mesh& initial, std::string_view preset,
                                           std::span<const double> kappas, const AdaptOptions& options);

/// Energy distance between a coarse discrete function and a function on a
/// nested refinement (the coarse function is interpolated exactly).
[[nodiscard]] double nested_energy_distance(const Mesh& coarse, const DiscreteFunction& u_coarse, const Mesh& fine,
                                            const DiscreteFunction& u_fine, double kappa);

}  // namespace rdest
