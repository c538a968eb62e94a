#pragma once

#include <array>
#include <vector>

#include "rdest/galerkin.hpp"
#include "rdest/mesh.hpp"
#include "rdest/problem.hpp"
#include "rdest/quadrature.hpp"

namespace rdest {

/// The three functions phi*_{z;T} = psi_z^T b_T of one element, where
/// b_T = l0 l1 l2 and psi_z^T is the P1 dual basis of the hats with respect
/// to the b_T-weighted L2 product.
struct ElementDualFunction {
  int element = -1;
  /// psi[z][k] is the coefficient of l_k in psi_z^T (local indices).
  std::array<std::array<double, 3>, 3> psi{};

  [[nodiscard]] double value(int z, const std::array<double, 3>& l) const {
    return (psi[z][0] * l[0] + psi[z][1] * l[1] + psi[z][2] * l[2]) * l[0] * l[1] * l[2];
  }
  /// Derivatives with respect to the barycentric coordinates.
  [[nodiscard]] std::array<double, 3> barycentric_derivative(int z, const std::array<double, 3>& l) const;
};

/// One half of the squeezed face bubble: the element on one side of F, its
/// squeezed copy and the corrections gamma_{z;T} = <phi_{z;T}, psi_F>.
struct FaceBubbleSide {
  int element = -1;
  SqueezedTriangle squeezed;
  std::array<double, 3> gamma{};  // by local vertex of element
};

/// phi*_F = psi_F - sum_{T, z} gamma_{z;T} phi*_{z;T}, with
/// psi_F = b_F / int_F b_F and b_F the product of the squeezed hats of F's
/// endpoints on every T_theta.
struct FaceDualFunction {
  int face = -1;
  /// 1 / int_F b_F = 6 / |F|.
  double scale = 0.0;
  std::array<FaceBubbleSide, 2> sides;

  /// psi_F at a point of the element of the given side.
  [[nodiscard]] double bubble(int side, const Point& x) const;
};

/// theta = min{1, 1 / (h_T kappa)}.
[[nodiscard]] double squeeze_factor(double h, double kappa);

/// Solves the weighted 3x3 Gram system of element t.
[[nodiscard]] ElementDualFunction element_dual_basis(const Mesh& mesh, int t);

/// Squeezed bubble psi_F of an interior face (corrections left at zero).
/// Throws std::invalid_argument for boundary faces.
[[nodiscard]] FaceDualFunction face_bubble(const Mesh& mesh, int f, double kappa);

/// Completes psi_F with the element corrections that make it orthogonal to
/// every phi_{y;T'} with T' in omega_F.
[[nodiscard]] FaceDualFunction phi_star_face(const Mesh& mesh, int f, double kappa,
                                             const ElementDualFunction& side0,
                                             const ElementDualFunction& side1);

/// All dual functions of one (mesh, kappa) pair and the operator Pi built on
/// them. Keeps a reference to the mesh, which must outlive it.
class DualSystem {
 public:
  DualSystem(const Mesh& mesh, double kappa, int quad_degree = 8);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] int quad_degree() const { return quad_degree_; }

  [[nodiscard]] const ElementDualFunction& element_duals(int t) const { return element_[t]; }
  /// Face duals exist for interior faces only.
  [[nodiscard]] const FaceDualFunction& face_dual(int f) const;
  [[nodiscard]] bool has_face_dual(int f) const { return face_slot_[f] >= 0; }

  /// Pointwise values; x must lie in element t (resp. in the element of the side).
  [[nodiscard]] double element_dual_value(int t, int z, const Point& x) const;
  [[nodiscard]] double face_dual_value(int f, int side, const Point& x) const;

  /// <f, phi*_{z;T}> and <f, phi*_F> for an analytic field, by quadrature
  /// over T and over the squeezed T_theta.
  [[nodiscard]] double pair_element(const ScalarField& f, int t, int z) const;
  [[nodiscard]] double pair_face(const ScalarField& f, int f_index) const;
  /// The same pairings for members of S~; exact up to roundoff.
  [[nodiscard]] double pair_element(const TildeSFunctional& g, int t, int z) const;
  [[nodiscard]] double pair_face(const TildeSFunctional& g, int f_index) const;

  /// Pi g = sum <g, phi*_{z;T}> phi_{z;T} + sum_F <g, phi*_F> delta_F.
  [[nodiscard]] TildeSFunctional project(const ScalarField& f) const;
  [[nodiscard]] TildeSFunctional project(const TildeSFunctional& g) const;

  /// Energy norms on the support, used for scaling diagnostics.
  [[nodiscard]] double element_dual_energy(int t, int z) const;
  [[nodiscard]] double face_bubble_energy(int f) const;

  /// Histogram of the squeeze factors of all face sides, by decade
  /// (bin k counts theta in (10^{-k-1}, 10^{-k}]).
  [[nodiscard]] std::vector<int> theta_histogram() const;

 private:
  const Mesh* mesh_;
  double kappa_;
  int quad_degree_;
  std::vector<ElementDualFunction> element_;
  std::vector<FaceDualFunction> face_;
  std::vector<int> face_slot_;
};

/// Pi as a free function, matching the operator's definition.
[[nodiscard]] TildeSFunctional project_pi(const DualSystem& duals, const ScalarField& f);

}  // namespace rdest
