#include "rdest/verification.hpp"

#include <algorithm>
#include <cmath>

#include "rdest/quadrature.hpp"

namespace rdest {

namespace {

constexpr int kDegree = 10;

Triangle element_triangle(const Mesh& mesh, int t) {
  const auto& e = mesh.element(t);
  return {mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2])};
}

// int_T w phi*_F for the side element T, split at the squeezed triangle
// because phi*_F is only piecewise smooth there.
template <class Weight>
double integrate_face_dual(const DualSystem& duals, int f, int side, Weight&& w) {
  const FaceBubbleSide& s = duals.face_dual(f).sides[side];
  const Triangle& sq = s.squeezed.vertices;
  const Triangle rest{sq[2], sq[1], duals.mesh().vertex(duals.mesh().element(s.element)[s.squeezed.parent_local[2]])};
  const auto fn = [&](const Point& x) { return w(x) * duals.face_dual_value(f, side, x); };
  double value = gauss_simplex(sq, kDegree, fn);
  if (s.squeezed.theta < 1.0) value += gauss_simplex(rest, kDegree, fn);
  return value;
}

// Barycentric coordinates of the point s along local edge k of an element,
// exact in the coordinate that vanishes on the edge.
std::array<double, 3> edge_barycentric(int k, double s) {
  std::array<double, 3> l{0.0, 0.0, 0.0};
  l[k] = 1.0 - s;
  l[(k + 1) % 3] = s;
  return l;
}

// phi*_F on local edge k of the side element.
double face_dual_on_edge(const DualSystem& duals, int f, int side, int k, double s) {
  const Mesh& mesh = duals.mesh();
  const FaceDualFunction& d = duals.face_dual(f);
  const FaceBubbleSide& sd = d.sides[side];
  const auto& e = mesh.element(sd.element);
  const Point x = (1.0 - s) * mesh.vertex(e[k]) + s * mesh.vertex(e[(k + 1) % 3]);
  const auto l = edge_barycentric(k, s);
  double value = d.bubble(side, x);
  for (int z = 0; z < 3; ++z) value -= sd.gamma[z] * duals.element_duals(sd.element).value(z, l);
  return value;
}

}  // namespace

double BiorthogonalityErrors::max() const { return std::max({element, face, face_hat}); }

BiorthogonalityErrors check_biorthogonality(const DualSystem& duals) {
  const Mesh& mesh = duals.mesh();
  BiorthogonalityErrors err;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const Triangle tri = element_triangle(mesh, t);
    for (int z = 0; z < 3; ++z) {
      for (int y = 0; y < 3; ++y) {
        const double v = gauss_simplex(tri, kDegree, [&](const Point& x) {
          return mesh.barycentric(t, x)[y] * duals.element_dual_value(t, z, x);
        });
        err.element = std::max(err.element, std::abs(v - (y == z ? 1.0 : 0.0)));
      }
      for (int k = 0; k < 3; ++k) {
        const double v = gauss_edge(tri[k], tri[(k + 1) % 3], kDegree, [&](double s) {
          return duals.element_duals(t).value(z, edge_barycentric(k, s));
        });
        err.element = std::max(err.element, std::abs(v));
      }
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!duals.has_face_dual(f)) continue;
    const Face& face = mesh.face(f);
    for (int side = 0; side < 2; ++side) {
      const int t = face.elements[side];
      for (int y = 0; y < 3; ++y) {
        const double v = integrate_face_dual(duals, f, side, [&](const Point& x) { return mesh.barycentric(t, x)[y]; });
        err.face_hat = std::max(err.face_hat, std::abs(v));
      }
      const auto& e = mesh.element(t);
      for (int k = 0; k < 3; ++k) {
        const int fk = mesh.element_faces(t)[k];
        if (fk == f && side == 1) continue;
        const double v = gauss_edge(mesh.vertex(e[k]), mesh.vertex(e[(k + 1) % 3]), kDegree,
                                    [&](double s) { return face_dual_on_edge(duals, f, side, k, s); });
        err.face = std::max(err.face, std::abs(v - (fk == f ? 1.0 : 0.0)));
      }
    }
  }
  return err;
}

namespace {

double coefficient_scale(const TildeSFunctional& g) {
  double m = 1.0;
  for (const auto& d : g.density) {
    for (double v : d) m = std::max(m, std::abs(v));
  }
  for (double c : g.face) m = std::max(m, std::abs(c));
  return m;
}

double coefficient_deviation(const Mesh& mesh, const TildeSFunctional& a, const TildeSFunctional& b) {
  double m = 0.0;
  for (int t = 0; t < mesh.num_elements(); ++t) {
    for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(a.density[t][i] - b.density[t][i]));
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.face(f).boundary()) m = std::max(m, std::abs(a.face[f] - b.face[f]));
  }
  return m;
}

}  // namespace

double check_tilde_invariance(const DualSystem& duals, int samples, std::mt19937_64& rng) {
  const Mesh& mesh = duals.mesh();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    TildeSFunctional g = TildeSFunctional::zero(mesh);
    for (auto& d : g.density) {
      for (double& v : d) v = unit(rng);
    }
    for (int f = 0; f < mesh.num_faces(); ++f) {
      if (!mesh.face(f).boundary()) g.face[f] = unit(rng);
    }
    worst = std::max(worst, coefficient_deviation(mesh, duals.project(g), g) / coefficient_scale(g));
  }
  return worst;
}

double check_operator_invariance(const DualSystem& duals, int samples, std::mt19937_64& rng) {
  const Mesh& mesh = duals.mesh();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    DiscreteFunction v;
    v.coefficients.resize(mesh.num_free_vertices());
    for (int d = 0; d < mesh.num_free_vertices(); ++d) v.coefficients[d] = unit(rng);
    const TildeSFunctional lv = apply_L_to_discrete(mesh, duals.kappa(), v);
    worst = std::max(worst, coefficient_deviation(mesh, duals.project(lv), lv) / coefficient_scale(lv));
  }
  return worst;
}

ScalingRange check_scaling(const DualSystem& duals) {
  const Mesh& mesh = duals.mesh();
  ScalingRange range{1e300, 0.0};
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const double denom = std::max(1.0 / mesh.diameter(t), duals.kappa()) / std::sqrt(mesh.area(t));
    for (int z = 0; z < 3; ++z) {
      const double c = duals.element_dual_energy(t, z) / denom;
      range.min = std::min(range.min, c);
      range.max = std::max(range.max, c);
    }
  }
  return range;
}

LocalizationResult check_localization(const Mesh& mesh, const Problem& problem, int depth, int quad_degree) {
  const DiscreteFunction u = solve_galerkin(assemble_operator(mesh, problem.kappa),
                                            assemble_load(mesh, problem.rhs, quad_degree), 1e-13);
  ResidualFunctional g;
  g.add_field(problem.rhs).add_operator_of(u, problem.kappa, -1.0).set_quad_degree(quad_degree);
  return localize_check(mesh, problem.kappa, g, depth);
}

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

VerifyReport run_verification(const Mesh& mesh, std::span<const double> kappas, std::uint64_t seed,
                              const VerifyOptions& options) {
  VerifyReport report;
  std::mt19937_64 rng(seed);
  const auto add = [&](std::string name, double kappa, double measured, double lower, double upper) {
    report.checks.push_back({std::move(name), kappa, measured, lower, upper, measured >= lower && measured <= upper});
  };
  std::vector<ScalingRange> scaling;
  for (double kappa : kappas) {
    const DualSystem duals(mesh, kappa, options.quad_degree);
    const BiorthogonalityErrors b = check_biorthogonality(duals);
    add("biorthogonality_element", kappa, b.element, 0.0, options.identity_tol);
    add("biorthogonality_face", kappa, b.face, 0.0, options.identity_tol);
    add("biorthogonality_face_hat", kappa, b.face_hat, 0.0, options.identity_tol);
    add("invariance_tilde", kappa, check_tilde_invariance(duals, options.samples, rng), 0.0, options.invariance_tol);
    add("invariance_operator", kappa, check_operator_invariance(duals, options.samples, rng), 0.0,
        options.invariance_tol);
    if (mesh.num_free_vertices() > 0) {
      const LocalizationResult loc =
          check_localization(mesh, make_problem(options.preset, kappa), options.dual_depth, options.quad_degree);
      add("localization_ratio", kappa, loc.global > 0.0 ? loc.local_sum / loc.global : 1.0,
          options.localization_low, options.localization_high);
    }
    scaling.push_back(check_scaling(duals));
    add("scaling_constant_max", kappa, scaling.back().max, 0.0, 1e300);
  }
  double lo = 1e300;
  double hi = 0.0;
  for (const ScalingRange& s : scaling) {
    lo = std::min(lo, s.max);
    hi = std::max(hi, s.max);
  }
  if (!scaling.empty()) add("scaling_spread", 0.0, hi / lo, 1.0, options.scaling_spread);
  return report;
}

}  // namespace rdest
