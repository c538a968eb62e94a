#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "rdest/dual_system.hpp"
#include "rdest/galerkin.hpp"
#include "rdest/mesh.hpp"
#include "rdest/problem.hpp"

namespace rdest {

/// Elementwise P1 residual r and facewise constant jump residual j:
///   r|_T = (Pi f)|_T - kappa^2 U,   j|_F = (Pi f)_F - (L U)_F = (Pi f)_F + [grad U . n_F].
struct ResidualData {
  std::vector<std::array<double, 3>> element;
  std::vector<double> face;  // zero on boundary faces
};

[[nodiscard]] ResidualData residuals(const Mesh& mesh, double kappa, const DiscreteFunction& u,
                                     const TildeSFunctional& pi_f);

/// Computable indicator
///   (sum_{T in omega_z} min{h_T, 1/kappa}^2 |r|_T^2)^{1/2}
///     + (sum_{F in sigma_z} min{h_F, 1/kappa} |j|_F^2)^{1/2}.
[[nodiscard]] double vertex_indicator(const Mesh& mesh, int z, const ResidualData& rd, double kappa);

/// A linear functional on H^1_0 given as a signed sum of an analytic density,
/// members of S~ and operator images L(U) of discrete functions. Stores
/// references; the referenced data must outlive it.
class ResidualFunctional {
 public:
  ResidualFunctional& add_field(const ScalarField& f, double coefficient = 1.0);
  ResidualFunctional& add_tilde(const TildeSFunctional& g, double coefficient = 1.0);
  /// Adds coefficient * L(U), i.e. v -> coefficient * a(U, v).
  ResidualFunctional& add_operator_of(const DiscreteFunction& u, double kappa, double coefficient = 1.0);
  ResidualFunctional& set_quad_degree(int degree);

  [[nodiscard]] bool empty() const { return fields_.empty() && tildes_.empty() && discretes_.empty(); }

  /// Contributions <g, mu_i> for the hats mu_i of a sub-triangle of a coarse
  /// element. edge_faces holds, per local edge (k, k+1), the coarse face the
  /// edge lies on, or -1. Dirac parts of an interior face are only added on
  /// sub-triangles of the face's elements[0].
  [[nodiscard]] std::array<double, 3> sub_element_load(const Mesh& mesh, int coarse, const Triangle& tri,
                                                       const std::array<int, 3>& edge_faces) const;

  /// <g, phi_z> for all free nodes of the coarse mesh. term_scale receives
  /// the largest entry of any single term's load vector.
  [[nodiscard]] Eigen::VectorXd coarse_load(const Mesh& mesh, double* term_scale = nullptr) const;

 private:
  struct FieldTerm {
    const ScalarField* f;
    double c;
  };
  struct TildeTerm {
    const TildeSFunctional* g;
    double c;
  };
  struct DiscreteTerm {
    const DiscreteFunction* u;
    double kappa;
    double c;
  };
  std::vector<FieldTerm> fields_;
  std::vector<TildeTerm> tildes_;
  std::vector<DiscreteTerm> discretes_;
  int quad_degree_ = 8;
};

/// Computable lower bound of the dual norm |||g|||_{*, omega}: the energy
/// norm of the Riesz representative of g in the P1 space on omega (the union
/// of the given elements) refined uniformly `depth` times, with zero values
/// on the boundary of omega. Nondecreasing in depth.
[[nodiscard]] double discrete_dual_norm(const Mesh& mesh, std::span<const int> elements,
                                        const ResidualFunctional& g, double kappa, int depth);
[[nodiscard]] double discrete_dual_norm(const Mesh& mesh, const Star& star, const ResidualFunctional& g,
                                        double kappa, int depth);

/// |||f - Pi f|||_{*, omega_z} by discrete_dual_norm.
[[nodiscard]] double oscillation_surrogate(const Mesh& mesh, int z, const ScalarField& f,
                                           const TildeSFunctional& pi_f, double kappa, int depth,
                                           int quad_degree = 8);

/// Classical residual indicator of one element with f_T the element mean of f:
///   min{h_T, 1/kappa}^2 |f_T - kappa^2 U|_T^2
///     + 1/2 sum_{F in dT interior} min{h_F, 1/kappa} |[grad U . n_F]|_F^2.
[[nodiscard]] double classic_indicator(const Mesh& mesh, int t, const ScalarField& f,
                                       const DiscreteFunction& u, double kappa, int quad_degree = 8);

struct LocalizationResult {
  double global = 0.0;
  double local_sum = 0.0;
};

/// Global and star-summed discrete dual norms of a functional orthogonal to
/// the discrete space. Throws std::invalid_argument when <g, phi_z> is not
/// negligible for some free node z.
[[nodiscard]] LocalizationResult localize_check(const Mesh& mesh, double kappa, const ResidualFunctional& g,
                                                int depth);

struct EstimatorOptions {
  int quad_degree = 8;
  int dual_depth = 2;
  bool oscillation = true;
  bool classic = true;
};

struct IndicatorReport {
  std::vector<double> indicator;        // E(U, z) per vertex
  std::vector<double> oscillation;      // osc_z per vertex (empty when not computed)
  std::vector<double> element_weight;   // min{h_T, 1/kappa}
  std::vector<double> face_weight;      // min{h_F, 1/kappa}
  std::vector<double> classic;          // squared classical indicator per element
  std::vector<double> local_error;      // |||u - U|||_{omega_z} when u is known
  double estimator = 0.0;               // (sum_z E^2)^{1/2}
  double global_oscillation = 0.0;      // (sum_z osc_z^2)^{1/2}
  double classic_estimator = 0.0;       // (sum_T classic_T)^{1/2}
  std::optional<double> true_error;
  std::optional<double> effectivity;    // (est^2 + osc^2)^{1/2} / error
  std::vector<int> theta_histogram;
};

/// Pi f, residuals, all vertex indicators and (optionally) oscillations,
/// classical indicators and true errors for a Galerkin solution.
[[nodiscard]] IndicatorReport estimate(const Mesh& mesh, const Problem& problem, const DiscreteFunction& u,
                                       const EstimatorOptions& options = {});

}  // namespace rdest
