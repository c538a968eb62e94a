#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rdest/mesh.hpp"
#include "rdest/problem.hpp"

namespace rdest {

using SparseMatrix = Eigen::SparseMatrix<double>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Member of the conforming P1 space with zero trace; one coefficient per
/// free vertex (see Mesh::dof).
struct DiscreteFunction {
  Eigen::VectorXd coefficients;

  [[nodiscard]] double at_vertex(const Mesh& mesh, int v) const {
    const int d = mesh.dof(v);
    return d < 0 ? 0.0 : coefficients[d];
  }
  [[nodiscard]] std::array<double, 3> element_values(const Mesh& mesh, int t) const;
  [[nodiscard]] Point gradient(const Mesh& mesh, int t) const;
  [[nodiscard]] double evaluate(const Mesh& mesh, int t, const Point& x) const;
};

/// Element of S~: a P1 density on every element plus a Dirac coefficient on
/// every face. The action on phi is
///   sum_T int_T p_T phi + sum_F c_F int_F phi.
/// Boundary face coefficients are carried but never act on H^1_0 functions.
struct TildeSFunctional {
  std::vector<std::array<double, 3>> density;  // values at the element's local vertices
  std::vector<double> face;

  [[nodiscard]] static TildeSFunctional zero(const Mesh& mesh);
  /// Density of element t at barycentric coordinates l.
  [[nodiscard]] double density_at(int t, const std::array<double, 3>& l) const {
    return density[t][0] * l[0] + density[t][1] * l[1] + density[t][2] * l[2];
  }
};

/// A(y, z) = int grad phi_y . grad phi_z + kappa^2 int phi_y phi_z over free nodes.
[[nodiscard]] SparseMatrix assemble_operator(const Mesh& mesh, double kappa);
[[nodiscard]] SparseMatrix assemble_stiffness(const Mesh& mesh);
[[nodiscard]] SparseMatrix assemble_mass(const Mesh& mesh);

/// <f, phi_z> for every free node by Gauss quadrature of the given degree.
[[nodiscard]] Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarField& f, int degree);

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned CG to the given relative residual, capped at
/// 10 * dof iterations. Throws SolverError on non-convergence.
[[nodiscard]] DiscreteFunction solve_galerkin(const SparseMatrix& system, const Eigen::VectorXd& load,
                                              double tol = 1e-10, SolveStats* stats = nullptr);

/// Energy norm over a subset of elements (all elements when region is empty).
[[nodiscard]] double energy_norm(const Mesh& mesh, double kappa, const DiscreteFunction& v,
                                 std::span<const int> region = {});
[[nodiscard]] double energy_norm(const Mesh& mesh, double kappa, const ExactSolution& v,
                                 std::span<const int> region = {}, int degree = 8);
/// Energy norm of u - U, by elementwise quadrature.
[[nodiscard]] double energy_error(const Mesh& mesh, double kappa, const ExactSolution& u,
                                  const DiscreteFunction& discrete, std::span<const int> region = {},
                                  int degree = 8);
/// Squared energy error of every element.
[[nodiscard]] std::vector<double> element_energy_errors(const Mesh& mesh, double kappa,
                                                        const ExactSolution& u,
                                                        const DiscreteFunction& discrete,
                                                        int degree = 8);

/// a(v, w) for two discrete functions.
[[nodiscard]] double bilinear_form(const Mesh& mesh, double kappa, const DiscreteFunction& v,
                                   const DiscreteFunction& w);

/// L(V) represented in S~: density kappa^2 V, face coefficient
/// (grad V|_{T0} - grad V|_{T1}) . n_F = -[grad V . n_F], with the jump taken
/// in the direction of n_F (from elements[0] to elements[1]).
[[nodiscard]] TildeSFunctional apply_L_to_discrete(const Mesh& mesh, double kappa,
                                                   const DiscreteFunction& v);

/// Jump [grad V . n_F] = (grad V|_{T1} - grad V|_{T0}) . n_F of an interior face.
[[nodiscard]] double normal_jump(const Mesh& mesh, const DiscreteFunction& v, int f);

/// <g, phi_z> for every free node, exact.
[[nodiscard]] Eigen::VectorXd pair_with_hats(const Mesh& mesh, const TildeSFunctional& g);

/// Nodal interpolant of a field (boundary values dropped).
[[nodiscard]] DiscreteFunction interpolate(const Mesh& mesh, const ScalarField& f);

}  // namespace rdest
