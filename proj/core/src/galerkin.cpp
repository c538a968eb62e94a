#include "rdest/galerkin.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "rdest/quadrature.hpp"

namespace rdest {

namespace {

Triangle element_triangle(const Mesh& mesh, int t) {
  const auto& e = mesh.element(t);
  return {mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2])};
}

// Local mass matrix of P1 on T is |T|/12 (1 + delta_ij).
template <class LocalFn>
SparseMatrix assemble(const Mesh& mesh, LocalFn&& local) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(9 * mesh.num_elements()));
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto& e = mesh.element(t);
    const auto grads = mesh.barycentric_gradients(t);
    for (int i = 0; i < 3; ++i) {
      const int di = mesh.dof(e[i]);
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = mesh.dof(e[j]);
        if (dj < 0) continue;
        triplets.emplace_back(di, dj, local(t, grads, i, j));
      }
    }
  }
  SparseMatrix a(mesh.num_free_vertices(), mesh.num_free_vertices());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

double p1_mass(double area, int i, int j) { return area / 12.0 * (i == j ? 2.0 : 1.0); }

template <class Fn>
double sum_over(const Mesh& mesh, std::span<const int> region, Fn&& fn) {
  double s = 0.0;
  if (region.empty()) {
    for (int t = 0; t < mesh.num_elements(); ++t) s += fn(t);
  } else {
    for (int t : region) s += fn(t);
  }
  return s;
}

}  // namespace

std::array<double, 3> DiscreteFunction::element_values(const Mesh& mesh, int t) const {
  const auto& e = mesh.element(t);
  return {at_vertex(mesh, e[0]), at_vertex(mesh, e[1]), at_vertex(mesh, e[2])};
}

Point DiscreteFunction::gradient(const Mesh& mesh, int t) const {
  const auto vals = element_values(mesh, t);
  const auto g = mesh.barycentric_gradients(t);
  return vals[0] * g[0] + vals[1] * g[1] + vals[2] * g[2];
}

double DiscreteFunction::evaluate(const Mesh& mesh, int t, const Point& x) const {
  const auto vals = element_values(mesh, t);
  const auto l = mesh.barycentric(t, x);
  return vals[0] * l[0] + vals[1] * l[1] + vals[2] * l[2];
}

TildeSFunctional TildeSFunctional::zero(const Mesh& mesh) {
  TildeSFunctional g;
  g.density.assign(mesh.num_elements(), {0.0, 0.0, 0.0});
  g.face.assign(mesh.num_faces(), 0.0);
  return g;
}

SparseMatrix assemble_operator(const Mesh& mesh, double kappa) {
  const double k2 = kappa * kappa;
  return assemble(mesh, [&](int t, const std::array<Point, 3>& g, int i, int j) {
    return mesh.area(t) * g[i].dot(g[j]) + k2 * p1_mass(mesh.area(t), i, j);
  });
}

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  return assemble(mesh, [&](int t, const std::array<Point, 3>& g, int i, int j) {
    return mesh.area(t) * g[i].dot(g[j]);
  });
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  return assemble(mesh, [&](int t, const std::array<Point, 3>&, int i, int j) {
    return p1_mass(mesh.area(t), i, j);
  });
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarField& f, int degree) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_free_vertices());
  const QuadratureRule& rule = triangle_rule(degree);
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto& e = mesh.element(t);
    const Triangle tri = element_triangle(mesh, t);
    std::array<double, 3> local{0.0, 0.0, 0.0};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const double fx = f(l[0] * tri[0] + l[1] * tri[1] + l[2] * tri[2]) * rule.weights[q];
      for (int i = 0; i < 3; ++i) local[i] += fx * l[i];
    }
    for (int i = 0; i < 3; ++i) {
      const int d = mesh.dof(e[i]);
      if (d >= 0) b[d] += mesh.area(t) * local[i];
    }
  }
  return b;
}

DiscreteFunction solve_galerkin(const SparseMatrix& system, const Eigen::VectorXd& load, double tol,
                                SolveStats* stats) {
  DiscreteFunction u;
  const Eigen::Index n = system.rows();
  if (n == 0 || load.norm() == 0.0) {
    u.coefficients = Eigen::VectorXd::Zero(n);
    if (stats) *stats = {};
    return u;
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(10) * n);
  cg.compute(system);
  u.coefficients = cg.solve(load);
  const double residual = (load - system * u.coefficients).norm() / load.norm();
  if (stats) *stats = {static_cast<int>(cg.iterations()), residual};
  if (cg.info() != Eigen::Success || !(residual <= 10.0 * tol)) {
    std::ostringstream os;
    os << "CG did not converge after " << cg.iterations() << " iterations (relative residual "
       << residual << ", tolerance " << tol << ")";
    throw SolverError(os.str());
  }
  return u;
}

double energy_norm(const Mesh& mesh, double kappa, const DiscreteFunction& v,
                   std::span<const int> region) {
  const double k2 = kappa * kappa;
  const double sq = sum_over(mesh, region, [&](int t) {
    const auto vals = v.element_values(mesh, t);
    const double s = vals[0] + vals[1] + vals[2];
    const double l2 =
        mesh.area(t) / 12.0 * (vals[0] * vals[0] + vals[1] * vals[1] + vals[2] * vals[2] + s * s);
    return mesh.area(t) * v.gradient(mesh, t).squaredNorm() + k2 * l2;
  });
  return std::sqrt(sq);
}

double energy_norm(const Mesh& mesh, double kappa, const ExactSolution& v,
                   std::span<const int> region, int degree) {
  const double k2 = kappa * kappa;
  const double sq = sum_over(mesh, region, [&](int t) {
    return gauss_simplex(element_triangle(mesh, t), degree, [&](const Point& x) {
      const double val = v.value(x);
      return v.gradient(x).squaredNorm() + k2 * val * val;
    });
  });
  return std::sqrt(sq);
}

std::vector<double> element_energy_errors(const Mesh& mesh, double kappa, const ExactSolution& u,
                                          const DiscreteFunction& discrete, int degree) {
  const double k2 = kappa * kappa;
  std::vector<double> err(mesh.num_elements());
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto vals = discrete.element_values(mesh, t);
    const Point grad = discrete.gradient(mesh, t);
    err[t] = gauss_simplex(element_triangle(mesh, t), degree, [&](const std::array<double, 3>& l) {
      const auto& e = mesh.element(t);
      const Point x = l[0] * mesh.vertex(e[0]) + l[1] * mesh.vertex(e[1]) + l[2] * mesh.vertex(e[2]);
      const double diff = u.value(x) - (vals[0] * l[0] + vals[1] * l[1] + vals[2] * l[2]);
      return (u.gradient(x) - grad).squaredNorm() + k2 * diff * diff;
    });
  }
  return err;
}

double energy_error(const Mesh& mesh, double kappa, const ExactSolution& u,
                    const DiscreteFunction& discrete, std::span<const int> region, int degree) {
  const auto err = element_energy_errors(mesh, kappa, u, discrete, degree);
  return std::sqrt(sum_over(mesh, region, [&](int t) { return err[t]; }));
}

double bilinear_form(const Mesh& mesh, double kappa, const DiscreteFunction& v,
                     const DiscreteFunction& w) {
  const double k2 = kappa * kappa;
  double s = 0.0;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto a = v.element_values(mesh, t);
    const auto b = w.element_values(mesh, t);
    double mass = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) mass += a[i] * b[j] * p1_mass(mesh.area(t), i, j);
    }
    s += mesh.area(t) * v.gradient(mesh, t).dot(w.gradient(mesh, t)) + k2 * mass;
  }
  return s;
}

double normal_jump(const Mesh& mesh, const DiscreteFunction& v, int f) {
  const Face& face = mesh.face(f);
  if (face.boundary()) return 0.0;
  return (v.gradient(mesh, face.elements[1]) - v.gradient(mesh, face.elements[0])).dot(face.normal);
}

TildeSFunctional apply_L_to_discrete(const Mesh& mesh, double kappa, const DiscreteFunction& v) {
  TildeSFunctional g = TildeSFunctional::zero(mesh);
  const double k2 = kappa * kappa;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto vals = v.element_values(mesh, t);
    for (int i = 0; i < 3; ++i) g.density[t][i] = k2 * vals[i];
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.face(f).boundary()) g.face[f] = -normal_jump(mesh, v, f);
  }
  return g;
}

Eigen::VectorXd pair_with_hats(const Mesh& mesh, const TildeSFunctional& g) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_free_vertices());
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto& e = mesh.element(t);
    const auto& p = g.density[t];
    const double s = p[0] + p[1] + p[2];
    for (int i = 0; i < 3; ++i) {
      const int d = mesh.dof(e[i]);
      if (d >= 0) b[d] += mesh.area(t) / 12.0 * (p[i] + s);
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (face.boundary() || g.face[f] == 0.0) continue;
    const double half = 0.5 * g.face[f] * mesh.face_length(f);
    for (int v : face.vertices) {
      const int d = mesh.dof(v);
      if (d >= 0) b[d] += half;
    }
  }
  return b;
}

DiscreteFunction interpolate(const Mesh& mesh, const ScalarField& f) {
  DiscreteFunction u;
  u.coefficients.resize(mesh.num_free_vertices());
  for (int d = 0; d < mesh.num_free_vertices(); ++d) u.coefficients[d] = f(mesh.vertex(mesh.dof_vertex(d)));
  return u;
}

}  // namespace rdest
