#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rdest/dual_system.hpp"
#include "rdest/estimator.hpp"
#include "rdest/mesh.hpp"

namespace rdest {

/// Largest deviations from the bi-orthogonality pattern, each evaluated
/// pointwise from the dual functions (T_theta and T \ T_theta integrated
/// separately) rather than from the stored corrections.
struct BiorthogonalityErrors {
  /// |int_T phi_{y;T} phi*_{z;T} - delta_yz| and |int_F' phi*_{z;T}|.
  double element = 0.0;
  /// |int_F' phi*_F - delta_FF'| over the faces of omega_F.
  double face = 0.0;
  /// |int_T' phi_{y;T'} phi*_F| over the elements of omega_F.
  double face_hat = 0.0;

  [[nodiscard]] double max() const;
};

[[nodiscard]] BiorthogonalityErrors check_biorthogonality(const DualSystem& duals);

/// Largest coefficient deviation of Pi g from g for random g, relative to
/// max{1, max |coefficient of g|}.
[[nodiscard]] double check_tilde_invariance(const DualSystem& duals, int samples, std::mt19937_64& rng);
/// The same for g = L(V) with random V.
[[nodiscard]] double check_operator_invariance(const DualSystem& duals, int samples, std::mt19937_64& rng);

/// Range of |||phi*_{z;T}|||_T |T|^{1/2} / max{1/h_T, kappa} over the mesh.
struct ScalingRange {
  double min = 0.0;
  double max = 0.0;
};
[[nodiscard]] ScalingRange check_scaling(const DualSystem& duals);

/// Localization of the Galerkin residual f - L(U) of the given problem.
[[nodiscard]] LocalizationResult check_localization(const Mesh& mesh, const Problem& problem, int depth,
                                                    int quad_degree = 8);

struct CheckResult {
  std::string name;
  double kappa = 0.0;
  double measured = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  int samples = 20;
  int dual_depth = 2;
  int quad_degree = 8;
  double identity_tol = 1e-11;
  double invariance_tol = 1e-9;
  double localization_low = 0.2;
  double localization_high = 20.0;
  double scaling_spread = 10.0;
  std::string preset = "sinsin";
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  [[nodiscard]] bool all_pass() const;
};

/// The property suite for every kappa of the list on one mesh.
[[nodiscard]] VerifyReport run_verification(const Mesh& mesh, std::span<const double> kappas, std::uint64_t seed,
                                            const VerifyOptions& options = {});

}  // namespace rdest
