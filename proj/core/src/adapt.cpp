#include "rdest/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdest {

namespace {

double distance_to_segment(const Point& x, const Point& a, const Point& b) {
  const Point d = b - a;
  const double s = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - (a + s * d)).norm();
}

// Bucket grid over element bounding boxes for point location.
class Locator {
 public:
  explicit Locator(const Mesh& mesh) : mesh_(mesh) {
    lo_ = hi_ = mesh.vertex(0);
    for (const Point& p : mesh.vertices()) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_elements()))));
    cell_ = (hi_ - lo_) / n_;
    buckets_.resize(static_cast<std::size_t>(n_) * n_);
    for (int t = 0; t < mesh.num_elements(); ++t) {
      Point blo = mesh.vertex(mesh.element(t)[0]);
      Point bhi = blo;
      for (int v : mesh.element(t)) {
        blo = blo.cwiseMin(mesh.vertex(v));
        bhi = bhi.cwiseMax(mesh.vertex(v));
      }
      const auto [i0, j0] = cell(blo);
      const auto [i1, j1] = cell(bhi);
      for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) buckets_[j * n_ + i].push_back(t);
      }
    }
  }

  [[nodiscard]] int find(const Point& x) const {
    const auto [i, j] = cell(x);
    int best = -1;
    double best_min = -1e300;
    for (int t : buckets_[j * n_ + i]) {
      const auto l = mesh_.barycentric(t, x);
      const double m = std::min({l[0], l[1], l[2]});
      if (m > best_min) {
        best_min = m;
        best = t;
      }
      if (m >= -1e-12) return t;
    }
    return best;
  }

 private:
  [[nodiscard]] std::pair<int, int> cell(const Point& x) const {
    const auto idx = [&](double v, double lo, double h) {
      return h > 0.0 ? std::clamp(static_cast<int>((v - lo) / h), 0, n_ - 1) : 0;
    };
    return {idx(x.x(), lo_.x(), cell_.x()), idx(x.y(), lo_.y(), cell_.y())};
  }

  const Mesh& mesh_;
  Point lo_;
  Point hi_;
  Point cell_;
  int n_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace

std::vector<int> dorfler_mark_vertices(std::span<const double> indicators, double theta) {
  if (indicators.empty()) throw std::invalid_argument("Doerfler marking on an empty indicator set");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("Doerfler parameter must lie in (0, 1)");
  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return indicators[a] > indicators[b]; });
  double total = 0.0;
  for (double e : indicators) total += e * e;
  const double target = theta * theta * total;
  std::vector<int> marked;
  double sum = 0.0;
  for (int z : order) {
    if (sum >= target) break;
    sum += indicators[z] * indicators[z];
    marked.push_back(z);
  }
  return marked;
}

std::vector<int> dorfler_mark(const Mesh& mesh, std::span<const double> indicators, double theta) {
  std::vector<int> elements;
  for (int z : dorfler_mark_vertices(indicators, theta)) {
    const auto star_elements = mesh.vertex_elements(z);
    elements.insert(elements.end(), star_elements.begin(), star_elements.end());
  }
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  return elements;
}

double boundary_band_fraction(const Mesh& mesh, std::span<const int> elements, double width) {
  if (elements.empty()) return 0.0;
  std::vector<int> boundary;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.face(f).boundary()) boundary.push_back(f);
  }
  int inside = 0;
  for (int t : elements) {
    const Point c = mesh.centroid(t);
    double d = 1e300;
    for (int f : boundary) {
      const Face& face = mesh.face(f);
      d = std::min(d, distance_to_segment(c, mesh.vertex(face.vertices[0]), mesh.vertex(face.vertices[1])));
      if (d <= width) break;
    }
    if (d <= width) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(elements.size());
}

RunReport adaptive_loop(const Mesh& initial, const Problem& problem, const AdaptOptions& options,
                        const IterationObserver& observer) {
  if (!(options.theta_mark > 0.0 && options.theta_mark < 1.0)) {
    throw std::invalid_argument("theta_mark must lie in (0, 1)");
  }
  RunReport report;
  report.problem = problem.name;
  report.kappa = problem.kappa;
  report.theta_mark = options.theta_mark;
  Mesh mesh = initial;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    DiscreteFunction u;
    try {
      const SparseMatrix a = assemble_operator(mesh, problem.kappa);
      const Eigen::VectorXd b = assemble_load(mesh, problem.rhs, options.quad_degree);
      u = solve_galerkin(a, b, options.solver_tol);
    } catch (const SolverError& e) {
      report.aborted = true;
      report.abort_reason = e.what();
      report.final_mesh = mesh;
      return report;
    }
    EstimatorOptions est_options;
    est_options.quad_degree = options.quad_degree;
    est_options.dual_depth = options.dual_depth;
    est_options.oscillation = options.oscillation_every > 0 && it % options.oscillation_every == 0;
    const IndicatorReport est = estimate(mesh, problem, u, est_options);

    IterationRecord rec;
    rec.iteration = it;
    rec.dofs = mesh.num_free_vertices();
    rec.elements = mesh.num_elements();
    rec.estimator = est.estimator;
    rec.classic_estimator = est.classic_estimator;
    if (est_options.oscillation) rec.oscillation = est.global_oscillation;
    rec.error = est.true_error;
    if (rec.error && *rec.error > 0.0) {
      const double osc = rec.oscillation.value_or(0.0);
      rec.effectivity = std::sqrt(est.estimator * est.estimator + osc * osc) / *rec.error;
    }

    const bool done = rec.dofs > options.max_dof;
    std::vector<int> marked;
    if (!done) marked = dorfler_mark(mesh, est.indicator, options.theta_mark);
    rec.marked_elements = static_cast<int>(marked.size());
    if (options.band_width && !marked.empty()) {
      rec.band_fraction = boundary_band_fraction(mesh, marked, *options.band_width);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.iterations.push_back(rec);
    if (observer) observer(mesh, u, est, rec);

    report.final_mesh = mesh;
    report.final_solution = u;
    if (done || marked.empty()) break;
    report.last_marked = marked;
    mesh = bisect(mesh, marked);
  }
  return report;
}

double nested_energy_distance(const Mesh& coarse, const DiscreteFunction& u_coarse, const Mesh& fine,
                              const DiscreteFunction& u_fine, double kappa) {
  const Locator locator(coarse);
  DiscreteFunction diff;
  diff.coefficients.resize(fine.num_free_vertices());
  for (int d = 0; d < fine.num_free_vertices(); ++d) {
    const Point& x = fine.vertex(fine.dof_vertex(d));
    const int t = locator.find(x);
    diff.coefficients[d] = u_fine.coefficients[d] - u_coarse.evaluate(coarse, t, x);
  }
  return energy_norm(fine, kappa, diff);
}

StudyReport robustness_study(const Mesh& initial, std::string_view preset, std::span<const double> kappas,
                             const AdaptOptions& options) {
  if (kappas.empty()) throw std::invalid_argument("robustness study needs at least one kappa");
  StudyReport study;
  study.problem = std::string(preset);
  for (double kappa : kappas) {
    const Problem problem = make_problem(preset, kappa);
    study.reference_proxy = !problem.exact.has_value();
    std::vector<Mesh> meshes;
    std::vector<DiscreteFunction> solutions;
    std::vector<IterationRecord> records;
    const RunReport run = adaptive_loop(initial, problem, options,
                                        [&](const Mesh& m, const DiscreteFunction& u, const IndicatorReport&,
                                            const IterationRecord& rec) {
                                          if (!problem.exact) {
                                            meshes.push_back(m);
                                            solutions.push_back(u);
                                          }
                                          records.push_back(rec);
                                        });
    if (run.aborted) throw SolverError("robustness study aborted: " + run.abort_reason);
    if (!problem.exact) {
      const Mesh reference = refine_uniform(run.final_mesh);
      const DiscreteFunction u_ref =
          solve_galerkin(assemble_operator(reference, kappa),
                         assemble_load(reference, problem.rhs, options.quad_degree), options.solver_tol);
      for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].error = nested_energy_distance(meshes[i], solutions[i], reference, u_ref, kappa);
      }
    }
    for (const IterationRecord& rec : records) {
      StudyRow row;
      row.kappa = kappa;
      row.iteration = rec.iteration;
      row.dofs = rec.dofs;
      row.estimator = rec.estimator;
      row.oscillation = rec.oscillation.value_or(0.0);
      row.error = rec.error.value_or(0.0);
      if (row.error > 0.0) {
        row.effectivity = std::hypot(row.estimator, row.oscillation) / row.error;
        row.classic_effectivity = rec.classic_estimator / row.error;
      }
      study.rows.push_back(row);
    }
  }
  double lo = 1e300;
  double hi = 0.0;
  double clo = 1e300;
  double chi = 0.0;
  for (const StudyRow& row : study.rows) {
    if (row.effectivity <= 0.0) continue;
    lo = std::min(lo, row.effectivity);
    hi = std::max(hi, row.effectivity);
    clo = std::min(clo, row.classic_effectivity);
    chi = std::max(chi, row.classic_effectivity);
  }
  if (hi > 0.0) {
    study.effectivity_spread = hi / lo;
    study.classic_spread = chi / clo;
  }
  return study;
}

}  // namespace rdest
