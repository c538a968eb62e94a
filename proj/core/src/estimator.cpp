#include "rdest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdest/quadrature.hpp"

namespace rdest {

namespace {

double p1_l2_squared(double area, const std::array<double, 3>& v) {
  const double s = v[0] + v[1] + v[2];
  return area / 12.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + s * s);
}

}  // namespace

ResidualData residuals(const Mesh& mesh, double kappa, const DiscreteFunction& u,
                       const TildeSFunctional& pi_f) {
  ResidualData rd;
  const double k2 = kappa * kappa;
  rd.element.resize(mesh.num_elements());
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto vals = u.element_values(mesh, t);
    for (int i = 0; i < 3; ++i) rd.element[t][i] = pi_f.density[t][i] - k2 * vals[i];
  }
  rd.face.assign(mesh.num_faces(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.face(f).boundary()) rd.face[f] = pi_f.face[f] + normal_jump(mesh, u, f);
  }
  return rd;
}

double vertex_indicator(const Mesh& mesh, int z, const ResidualData& rd, double kappa) {
  const Star s = star(mesh, z);
  const double inv_kappa = 1.0 / kappa;
  double element_part = 0.0;
  for (int t : s.elements) {
    const double w = std::min(mesh.diameter(t), inv_kappa);
    element_part += w * w * p1_l2_squared(mesh.area(t), rd.element[t]);
  }
  double face_part = 0.0;
  for (int f : s.faces) {
    if (mesh.face(f).boundary()) continue;
    const double w = std::min(mesh.face_diameter(f), inv_kappa);
    face_part += w * rd.face[f] * rd.face[f] * mesh.face_length(f);
  }
  return std::sqrt(element_part) + std::sqrt(face_part);
}

double oscillation_surrogate(const Mesh& mesh, int z, const ScalarField& f, const TildeSFunctional& pi_f,
                             double kappa, int depth, int quad_degree) {
  ResidualFunctional g;
  g.add_field(f).add_tilde(pi_f, -1.0).set_quad_degree(quad_degree);
  return discrete_dual_norm(mesh, star(mesh, z), g, kappa, depth);
}

double classic_indicator(const Mesh& mesh, int t, const ScalarField& f, const DiscreteFunction& u, double kappa,
                         int quad_degree) {
  const auto& e = mesh.element(t);
  const Triangle tri{mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2])};
  const double area = mesh.area(t);
  const double mean = gauss_simplex(tri, quad_degree, f) / area;
  const double k2 = kappa * kappa;
  const auto vals = u.element_values(mesh, t);
  std::array<double, 3> diff{};
  for (int i = 0; i < 3; ++i) diff[i] = mean - k2 * vals[i];
  const double inv_kappa = 1.0 / kappa;
  const double wt = std::min(mesh.diameter(t), inv_kappa);
  double value = wt * wt * p1_l2_squared(area, diff);
  for (int f_index : mesh.element_faces(t)) {
    if (mesh.face(f_index).boundary()) continue;
    const double jump = normal_jump(mesh, u, f_index);
    value += 0.5 * std::min(mesh.face_diameter(f_index), inv_kappa) * jump * jump * mesh.face_length(f_index);
  }
  return value;
}

LocalizationResult localize_check(const Mesh& mesh, double kappa, const ResidualFunctional& g, int depth) {
  double scale = 0.0;
  const Eigen::VectorXd load = g.coarse_load(mesh, &scale);
  const double worst = load.size() > 0 ? load.cwiseAbs().maxCoeff() : 0.0;
  if (worst > 1e-8 * scale && worst > 1e-14) {
    throw std::invalid_argument(
        "localize_check: functional is not orthogonal to the discrete space (max |<g, phi_z>| = " +
        std::to_string(worst) + ", term scale " + std::to_string(scale) + ")");
  }
  std::vector<int> all(mesh.num_elements());
  for (int t = 0; t < mesh.num_elements(); ++t) all[t] = t;
  LocalizationResult result;
  result.global = discrete_dual_norm(mesh, all, g, kappa, depth);
  std::vector<double> local(mesh.num_vertices());
#pragma omp parallel for schedule(dynamic, 16)
  for (int z = 0; z < mesh.num_vertices(); ++z) {
    local[z] = discrete_dual_norm(mesh, star(mesh, z), g, kappa, depth);
  }
  double sum = 0.0;
  for (double l : local) sum += l * l;
  result.local_sum = std::sqrt(sum);
  return result;
}

IndicatorReport estimate(const Mesh& mesh, const Problem& problem, const DiscreteFunction& u,
                         const EstimatorOptions& options) {
  const double kappa = problem.kappa;
  const DualSystem duals(mesh, kappa, options.quad_degree);
  const TildeSFunctional pi_f = duals.project(problem.rhs);
  const ResidualData rd = residuals(mesh, kappa, u, pi_f);

  IndicatorReport report;
  report.theta_histogram = duals.theta_histogram();
  const int nv = mesh.num_vertices();
  report.indicator.resize(nv);
  for (int z = 0; z < nv; ++z) report.indicator[z] = vertex_indicator(mesh, z, rd, kappa);

  report.element_weight.resize(mesh.num_elements());
  for (int t = 0; t < mesh.num_elements(); ++t) {
    report.element_weight[t] = std::min(mesh.diameter(t), 1.0 / kappa);
  }
  report.face_weight.resize(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) report.face_weight[f] = std::min(mesh.face_diameter(f), 1.0 / kappa);

  if (options.oscillation) {
    report.oscillation.resize(nv);
#pragma omp parallel for schedule(dynamic, 16)
    for (int z = 0; z < nv; ++z) {
      report.oscillation[z] =
          oscillation_surrogate(mesh, z, problem.rhs, pi_f, kappa, options.dual_depth, options.quad_degree);
    }
  }
  if (options.classic) {
    report.classic.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
      report.classic[t] = classic_indicator(mesh, t, problem.rhs, u, kappa, options.quad_degree);
    }
  }

  double est = 0.0;
  for (double e : report.indicator) est += e * e;
  report.estimator = std::sqrt(est);
  double osc = 0.0;
  for (double o : report.oscillation) osc += o * o;
  report.global_oscillation = std::sqrt(osc);
  double classic = 0.0;
  for (double c : report.classic) classic += c;
  report.classic_estimator = std::sqrt(classic);

  if (problem.exact) {
    const auto err = element_energy_errors(mesh, kappa, *problem.exact, u, options.quad_degree);
    double total = 0.0;
    for (double e : err) total += e;
    report.true_error = std::sqrt(total);
    report.local_error.resize(nv);
    for (int z = 0; z < nv; ++z) {
      double local = 0.0;
      for (int t : mesh.vertex_elements(z)) local += err[t];
      report.local_error[z] = std::sqrt(local);
    }
    if (*report.true_error > 0.0) {
      report.effectivity = std::sqrt(est + osc) / *report.true_error;
    }
  }
  return report;
}

}  // namespace rdest
