#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/SparseCholesky>

#include "rdest/estimator.hpp"
#include "rdest/quadrature.hpp"

namespace rdest {

namespace {

// Patch of coarse elements, refined uniformly, remembering for every
// sub-element its coarse parent and for every sub-edge the coarse face it
// lies on (-1 for edges interior to a coarse element).
struct SubMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<int> parent;
  std::vector<std::array<int, 3>> edge_faces;
};

std::uint64_t key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

SubMesh extract(const Mesh& mesh, std::span<const int> elements) {
  SubMesh sub;
  std::unordered_map<int, int> local;
  for (int t : elements) {
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.element(t)[k];
      auto [it, inserted] = local.try_emplace(v, static_cast<int>(sub.vertices.size()));
      if (inserted) sub.vertices.push_back(mesh.vertex(v));
      tri[k] = it->second;
    }
    sub.elements.push_back(tri);
    sub.parent.push_back(t);
    sub.edge_faces.push_back(mesh.element_faces(t));
  }
  return sub;
}

SubMesh red_refine(const SubMesh& in) {
  SubMesh out;
  out.vertices = in.vertices;
  std::unordered_map<std::uint64_t, int> midpoint;
  const auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(key(a, b), static_cast<int>(out.vertices.size()));
    if (inserted) out.vertices.push_back(0.5 * (in.vertices[a] + in.vertices[b]));
    return it->second;
  };
  const std::size_t n = in.elements.size();
  out.elements.reserve(4 * n);
  out.parent.reserve(4 * n);
  out.edge_faces.reserve(4 * n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto [a, b, c] = in.elements[t];
    const auto [e0, e1, e2] = in.edge_faces[t];  // edges ab, bc, ca
    const int mab = mid(a, b);
    const int mbc = mid(b, c);
    const int mca = mid(c, a);
    const int p = in.parent[t];
    out.elements.push_back({a, mab, mca});
    out.edge_faces.push_back({e0, -1, e2});
    out.elements.push_back({mab, b, mbc});
    out.edge_faces.push_back({e0, e1, -1});
    out.elements.push_back({mca, mbc, c});
    out.edge_faces.push_back({-1, e1, e2});
    out.elements.push_back({mab, mbc, mca});
    out.edge_faces.push_back({-1, -1, -1});
    for (int k = 0; k < 4; ++k) out.parent.push_back(p);
  }
  return out;
}

double tri_area(const Triangle& tri) {
  const Point u = tri[1] - tri[0];
  const Point v = tri[2] - tri[0];
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

std::array<Point, 3> tri_gradients(const Triangle& tri) {
  const double two_area = 2.0 * tri_area(tri);
  std::array<Point, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Point& a = tri[(k + 1) % 3];
    const Point& b = tri[(k + 2) % 3];
    g[k] = Point(a.y() - b.y(), b.x() - a.x()) / two_area;
  }
  return g;
}

}  // namespace

ResidualFunctional& ResidualFunctional::add_field(const ScalarField& f, double coefficient) {
  fields_.push_back({&f, coefficient});
  return *this;
}

ResidualFunctional& ResidualFunctional::add_tilde(const TildeSFunctional& g, double coefficient) {
  tildes_.push_back({&g, coefficient});
  return *this;
}

ResidualFunctional& ResidualFunctional::add_operator_of(const DiscreteFunction& u, double kappa,
                                                        double coefficient) {
  discretes_.push_back({&u, kappa, coefficient});
  return *this;
}

ResidualFunctional& ResidualFunctional::set_quad_degree(int degree) {
  (void)triangle_rule(degree);
  quad_degree_ = degree;
  return *this;
}

std::array<double, 3> ResidualFunctional::sub_element_load(const Mesh& mesh, int coarse, const Triangle& tri,
                                                           const std::array<int, 3>& edge_faces) const {
  std::array<double, 3> load{0.0, 0.0, 0.0};
  const double area = tri_area(tri);
  for (const FieldTerm& term : fields_) {
    const QuadratureRule& rule = triangle_rule(quad_degree_);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = term.c * area * rule.weights[q] *
                       (*term.f)(l[0] * tri[0] + l[1] * tri[1] + l[2] * tri[2]);
      for (int i = 0; i < 3; ++i) load[i] += w * l[i];
    }
  }
  for (const TildeTerm& term : tildes_) {
    std::array<double, 3> p{};
    for (int i = 0; i < 3; ++i) p[i] = term.g->density_at(coarse, mesh.barycentric(coarse, tri[i]));
    const double s = p[0] + p[1] + p[2];
    for (int i = 0; i < 3; ++i) load[i] += term.c * area / 12.0 * (p[i] + s);
    for (int k = 0; k < 3; ++k) {
      const int f = edge_faces[k];
      // Interior faces are seen from both sides; count them from elements[0].
      if (f < 0 || mesh.face(f).boundary() || mesh.face(f).elements[0] != coarse) continue;
      const double c = term.g->face[f];
      if (c == 0.0) continue;
      const double half = 0.5 * term.c * c * (tri[(k + 1) % 3] - tri[k]).norm();
      load[k] += half;
      load[(k + 1) % 3] += half;
    }
  }
  if (!discretes_.empty()) {
    const auto grads = tri_gradients(tri);
    for (const DiscreteTerm& term : discretes_) {
      std::array<double, 3> u{};
      for (int i = 0; i < 3; ++i) u[i] = term.u->evaluate(mesh, coarse, tri[i]);
      const Point grad_u = u[0] * grads[0] + u[1] * grads[1] + u[2] * grads[2];
      const double s = u[0] + u[1] + u[2];
      const double k2 = term.kappa * term.kappa;
      for (int i = 0; i < 3; ++i) {
        load[i] += term.c * (area * grad_u.dot(grads[i]) + k2 * area / 12.0 * (u[i] + s));
      }
    }
  }
  return load;
}

Eigen::VectorXd ResidualFunctional::coarse_load(const Mesh& mesh, double* term_scale) const {
  // Each term separately, so that the largest single contribution can be
  // reported as the scale of the cancellation.
  std::vector<ResidualFunctional> terms;
  for (const FieldTerm& t : fields_) terms.emplace_back().add_field(*t.f, t.c).set_quad_degree(quad_degree_);
  for (const TildeTerm& t : tildes_) terms.emplace_back().add_tilde(*t.g, t.c);
  for (const DiscreteTerm& t : discretes_) terms.emplace_back().add_operator_of(*t.u, t.kappa, t.c);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_free_vertices());
  double scale = 0.0;
  for (const ResidualFunctional& term : terms) {
    Eigen::VectorXd bt = Eigen::VectorXd::Zero(mesh.num_free_vertices());
    for (int t = 0; t < mesh.num_elements(); ++t) {
      const auto& e = mesh.element(t);
      const Triangle tri{mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2])};
      // Dirac parts are added once per face below.
      const auto load = term.sub_element_load(mesh, t, tri, {-1, -1, -1});
      for (int i = 0; i < 3; ++i) {
        const int d = mesh.dof(e[i]);
        if (d >= 0) bt[d] += load[i];
      }
    }
    for (const TildeTerm& tt : term.tildes_) {
      for (int f = 0; f < mesh.num_faces(); ++f) {
        const Face& face = mesh.face(f);
        if (face.boundary() || tt.g->face[f] == 0.0) continue;
        const double half = 0.5 * tt.c * tt.g->face[f] * mesh.face_length(f);
        for (int v : face.vertices) {
          const int d = mesh.dof(v);
          if (d >= 0) bt[d] += half;
        }
      }
    }
    if (bt.size() > 0) scale = std::max(scale, bt.cwiseAbs().maxCoeff());
    b += bt;
  }
  if (term_scale) *term_scale = scale;
  return b;
}

double discrete_dual_norm(const Mesh& mesh, std::span<const int> elements, const ResidualFunctional& g,
                          double kappa, int depth) {
  if (depth < 0) throw std::invalid_argument("dual norm refinement depth must be >= 0");
  if (elements.empty() || g.empty()) return 0.0;
  SubMesh sub = extract(mesh, elements);
  for (int level = 0; level < depth; ++level) sub = red_refine(sub);

  // Patch boundary: sub-edges with one adjacent sub-element.
  std::unordered_map<std::uint64_t, int> edge_count;
  for (const auto& e : sub.elements) {
    for (int k = 0; k < 3; ++k) ++edge_count[key(e[k], e[(k + 1) % 3])];
  }
  const int nv = static_cast<int>(sub.vertices.size());
  std::vector<int> dof(nv, 0);
  for (const auto& e : sub.elements) {
    for (int k = 0; k < 3; ++k) {
      if (edge_count[key(e[k], e[(k + 1) % 3])] == 1) {
        dof[e[k]] = -1;
        dof[e[(k + 1) % 3]] = -1;
      }
    }
  }
  int ndof = 0;
  for (int& d : dof) d = d < 0 ? -1 : ndof++;
  if (ndof == 0) return 0.0;

  const double k2 = kappa * kappa;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * sub.elements.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ndof);
  for (std::size_t t = 0; t < sub.elements.size(); ++t) {
    const auto& e = sub.elements[t];
    const Triangle tri{sub.vertices[e[0]], sub.vertices[e[1]], sub.vertices[e[2]]};
    const double area = tri_area(tri);
    const auto grads = tri_gradients(tri);
    const auto load = g.sub_element_load(mesh, sub.parent[t], tri, sub.edge_faces[t]);
    for (int i = 0; i < 3; ++i) {
      const int di = dof[e[i]];
      if (di < 0) continue;
      b[di] += load[i];
      for (int j = 0; j < 3; ++j) {
        const int dj = dof[e[j]];
        if (dj < 0) continue;
        triplets.emplace_back(di, dj, area * grads[i].dot(grads[j]) + k2 * area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SparseMatrix a(ndof, ndof);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  if (solver.info() != Eigen::Success) throw SolverError("local dual norm factorization failed");
  const Eigen::VectorXd w = solver.solve(b);
  if (solver.info() != Eigen::Success) throw SolverError("local dual norm solve failed");
  return std::sqrt(std::max(0.0, b.dot(w)));
}

double discrete_dual_norm(const Mesh& mesh, const Star& star, const ResidualFunctional& g, double kappa,
                          int depth) {
  return discrete_dual_norm(mesh, std::span<const int>(star.elements), g, kappa, depth);
}

}  // namespace rdest
