#include "rdest/dual_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rdest {

namespace {

Triangle element_triangle(const Mesh& mesh, int t) {
  const auto& e = mesh.element(t);
  return {mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2])};
}

Point from_barycentric(const Triangle& tri, const std::array<double, 3>& l) {
  return l[0] * tri[0] + l[1] * tri[1] + l[2] * tri[2];
}

// Degree used where all integrands are polynomials of the dual functions
// against P1 data (at most degree 5 on T, 3 on T_theta).
constexpr int kExactDegree = 6;

std::array<Point, 3> triangle_gradients(const Triangle& tri) {
  const double two_area = (tri[1] - tri[0]).x() * (tri[2] - tri[0]).y() -
                          (tri[1] - tri[0]).y() * (tri[2] - tri[0]).x();
  std::array<Point, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Point& a = tri[(k + 1) % 3];
    const Point& b = tri[(k + 2) % 3];
    g[k] = Point(a.y() - b.y(), b.x() - a.x()) / two_area;
  }
  return g;
}

}  // namespace

std::array<double, 3> ElementDualFunction::barycentric_derivative(int z, const std::array<double, 3>& l) const {
  const auto& c = psi[z];
  const double p = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
  const double b = l[0] * l[1] * l[2];
  return {c[0] * b + p * l[1] * l[2], c[1] * b + p * l[0] * l[2], c[2] * b + p * l[0] * l[1]};
}

double FaceDualFunction::bubble(int side, const Point& x) const {
  // For x in T, T \ T_theta is exactly where mu_p < 0, so clipping gives the
  // continuous extension by zero without an inside test that would be
  // ill-conditioned for small theta.
  const auto mu = sides[side].squeezed.barycentric(x);
  return scale * std::max(mu[0], 0.0) * std::max(mu[1], 0.0);
}

double squeeze_factor(double h, double kappa) { return std::min(1.0, 1.0 / (h * kappa)); }

ElementDualFunction element_dual_basis(const Mesh& mesh, int t) {
  const double area = mesh.area(t);
  if (!(area > 0.0)) throw std::logic_error("element dual basis on degenerate element");
  // G_yz = int_T b_T l_y l_z.
  Eigen::Matrix3d gram;
  for (int y = 0; y < 3; ++y) {
    for (int z = 0; z < 3; ++z) {
      std::array<int, 3> e{1, 1, 1};
      ++e[y];
      ++e[z];
      gram(y, z) = integrate_barycentric(area, e[0], e[1], e[2]);
    }
  }
  const Eigen::Matrix3d inv = gram.inverse();
  if (!inv.allFinite()) throw std::logic_error("singular weighted Gram matrix");
  ElementDualFunction d;
  d.element = t;
  for (int z = 0; z < 3; ++z) {
    for (int k = 0; k < 3; ++k) d.psi[z][k] = inv(k, z);
  }
  return d;
}

FaceDualFunction face_bubble(const Mesh& mesh, int f, double kappa) {
  const Face& face = mesh.face(f);
  if (face.boundary()) {
    throw std::invalid_argument("face bubble requested for boundary face " + std::to_string(f));
  }
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  FaceDualFunction d;
  d.face = f;
  // The trace of l_p l_q on F is s (1 - s) for every theta.
  d.scale = 6.0 / mesh.face_length(f);
  for (int s = 0; s < 2; ++s) {
    const int t = face.elements[s];
    d.sides[s].element = t;
    d.sides[s].squeezed = squeeze_element(mesh, t, f, squeeze_factor(mesh.diameter(t), kappa));
  }
  return d;
}

FaceDualFunction phi_star_face(const Mesh& mesh, int f, double kappa, const ElementDualFunction& side0,
                               const ElementDualFunction& side1) {
  FaceDualFunction d = face_bubble(mesh, f, kappa);
  if (side0.element != d.sides[0].element || side1.element != d.sides[1].element) {
    throw std::invalid_argument("element duals do not match the elements adjacent to face " +
                                std::to_string(f));
  }
  for (auto& side : d.sides) {
    const SqueezedTriangle& sq = side.squeezed;
    const Triangle tri = sq.vertices;
    for (int z = 0; z < 3; ++z) {
      // psi_F = scale mu_p mu_q on T_theta, zero on the rest of T.
      side.gamma[z] = gauss_simplex(tri, 4, [&](const std::array<double, 3>& mu) {
        const Point x = from_barycentric(tri, mu);
        return mesh.barycentric(side.element, x)[z] * d.scale * mu[0] * mu[1];
      });
    }
  }
  return d;
}

DualSystem::DualSystem(const Mesh& mesh, double kappa, int quad_degree)
    : mesh_(&mesh), kappa_(kappa), quad_degree_(quad_degree) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  (void)triangle_rule(quad_degree);  // validates the degree
  element_.resize(mesh.num_elements());
  for (int t = 0; t < mesh.num_elements(); ++t) element_[t] = element_dual_basis(mesh, t);
  face_slot_.assign(mesh.num_faces(), -1);
  face_.reserve(mesh.num_interior_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (face.boundary()) continue;
    face_slot_[f] = static_cast<int>(face_.size());
    face_.push_back(phi_star_face(mesh, f, kappa, element_[face.elements[0]], element_[face.elements[1]]));
  }
}

const FaceDualFunction& DualSystem::face_dual(int f) const {
  if (f < 0 || f >= static_cast<int>(face_slot_.size()) || face_slot_[f] < 0) {
    throw std::out_of_range("no face dual for face " + std::to_string(f));
  }
  return face_[face_slot_[f]];
}

double DualSystem::element_dual_value(int t, int z, const Point& x) const {
  return element_[t].value(z, mesh_->barycentric(t, x));
}

double DualSystem::face_dual_value(int f, int side, const Point& x) const {
  const FaceDualFunction& d = face_dual(f);
  const FaceBubbleSide& s = d.sides[side];
  const auto l = mesh_->barycentric(s.element, x);
  const ElementDualFunction& e = element_[s.element];
  double value = d.bubble(side, x);
  for (int z = 0; z < 3; ++z) value -= s.gamma[z] * e.value(z, l);
  return value;
}

double DualSystem::pair_element(const ScalarField& f, int t, int z) const {
  const Triangle tri = element_triangle(*mesh_, t);
  const ElementDualFunction& e = element_[t];
  return gauss_simplex(tri, quad_degree_, [&](const std::array<double, 3>& l) {
    return f(from_barycentric(tri, l)) * e.value(z, l);
  });
}

double DualSystem::pair_face(const ScalarField& f, int f_index) const {
  const FaceDualFunction& d = face_dual(f_index);
  double value = 0.0;
  for (const FaceBubbleSide& s : d.sides) {
    const Triangle tri = s.squeezed.vertices;
    value += gauss_simplex(tri, quad_degree_, [&](const std::array<double, 3>& mu) {
      return f(from_barycentric(tri, mu)) * d.scale * mu[0] * mu[1];
    });
    for (int z = 0; z < 3; ++z) {
      if (s.gamma[z] != 0.0) value -= s.gamma[z] * pair_element(f, s.element, z);
    }
  }
  return value;
}

double DualSystem::pair_element(const TildeSFunctional& g, int t, int z) const {
  // phi*_{z;T} vanishes on every face, so only the density acts.
  const Triangle tri = element_triangle(*mesh_, t);
  const ElementDualFunction& e = element_[t];
  return gauss_simplex(tri, kExactDegree, [&](const std::array<double, 3>& l) {
    return g.density_at(t, l) * e.value(z, l);
  });
}

double DualSystem::pair_face(const TildeSFunctional& g, int f_index) const {
  const Mesh& mesh = *mesh_;
  const FaceDualFunction& d = face_dual(f_index);
  double value = 0.0;
  for (int side = 0; side < 2; ++side) {
    const FaceBubbleSide& s = d.sides[side];
    const Triangle tri = s.squeezed.vertices;
    value += gauss_simplex(tri, kExactDegree, [&](const std::array<double, 3>& mu) {
      const Point x = from_barycentric(tri, mu);
      return g.density_at(s.element, mesh.barycentric(s.element, x)) * d.scale * mu[0] * mu[1];
    });
    for (int z = 0; z < 3; ++z) value -= s.gamma[z] * pair_element(g, s.element, z);
    // Dirac parts on the faces of omega_F; F itself is visited from side 0 only.
    for (int ff : mesh.element_faces(s.element)) {
      if (g.face[ff] == 0.0 || mesh.face(ff).boundary()) continue;
      if (ff == f_index && side == 1) continue;
      const Face& face = mesh.face(ff);
      const Point& a = mesh.vertex(face.vertices[0]);
      const Point& b = mesh.vertex(face.vertices[1]);
      value += g.face[ff] * gauss_edge(a, b, kExactDegree, [&](const Point& x) {
                 return face_dual_value(f_index, side, x);
               });
    }
  }
  return value;
}

TildeSFunctional DualSystem::project(const ScalarField& f) const {
  TildeSFunctional pi = TildeSFunctional::zero(*mesh_);
  for (int t = 0; t < mesh_->num_elements(); ++t) {
    for (int z = 0; z < 3; ++z) pi.density[t][z] = pair_element(f, t, z);
  }
  for (const FaceDualFunction& d : face_) {
    double value = 0.0;
    for (const FaceBubbleSide& s : d.sides) {
      const Triangle tri = s.squeezed.vertices;
      value += gauss_simplex(tri, quad_degree_, [&](const std::array<double, 3>& mu) {
        return f(from_barycentric(tri, mu)) * d.scale * mu[0] * mu[1];
      });
      for (int z = 0; z < 3; ++z) value -= s.gamma[z] * pi.density[s.element][z];
    }
    pi.face[d.face] = value;
  }
  return pi;
}

TildeSFunctional DualSystem::project(const TildeSFunctional& g) const {
  TildeSFunctional pi = TildeSFunctional::zero(*mesh_);
  for (int t = 0; t < mesh_->num_elements(); ++t) {
    for (int z = 0; z < 3; ++z) pi.density[t][z] = pair_element(g, t, z);
  }
  for (const FaceDualFunction& d : face_) pi.face[d.face] = pair_face(g, d.face);
  return pi;
}

double DualSystem::element_dual_energy(int t, int z) const {
  const Triangle tri = element_triangle(*mesh_, t);
  const auto grads = mesh_->barycentric_gradients(t);
  const ElementDualFunction& e = element_[t];
  const double k2 = kappa_ * kappa_;
  const double sq = gauss_simplex(tri, 8, [&](const std::array<double, 3>& l) {
    const auto dl = e.barycentric_derivative(z, l);
    const Point grad = dl[0] * grads[0] + dl[1] * grads[1] + dl[2] * grads[2];
    const double v = e.value(z, l);
    return grad.squaredNorm() + k2 * v * v;
  });
  return std::sqrt(sq);
}

double DualSystem::face_bubble_energy(int f) const {
  const FaceDualFunction& d = face_dual(f);
  const double k2 = kappa_ * kappa_;
  double sq = 0.0;
  for (const FaceBubbleSide& s : d.sides) {
    const Triangle tri = s.squeezed.vertices;
    const auto g = triangle_gradients(tri);
    sq += gauss_simplex(tri, 4, [&](const std::array<double, 3>& mu) {
      const Point grad = d.scale * (mu[1] * g[0] + mu[0] * g[1]);
      const double v = d.scale * mu[0] * mu[1];
      return grad.squaredNorm() + k2 * v * v;
    });
  }
  return std::sqrt(sq);
}

std::vector<int> DualSystem::theta_histogram() const {
  std::vector<int> bins;
  for (const FaceDualFunction& d : face_) {
    for (const FaceBubbleSide& s : d.sides) {
      const int k = std::max(0, static_cast<int>(std::floor(-std::log10(s.squeezed.theta) + 1e-12)));
      const int bin = s.squeezed.theta >= 1.0 ? 0 : k;
      if (bin >= static_cast<int>(bins.size())) bins.resize(bin + 1, 0);
      ++bins[bin];
    }
  }
  return bins;
}

TildeSFunctional project_pi(const DualSystem& duals, const ScalarField& f) { return duals.project(f); }

}  // namespace rdest
