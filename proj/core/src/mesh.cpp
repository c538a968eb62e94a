#include "rdest/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

namespace rdest {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * cross(b - a, c - a);
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::string edge_str(int a, int b) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ")";
  return os.str();
}

void rotate_longest_first(const std::vector<Point>& vertices, std::array<int, 3>& tri) {
  int best = 0;
  double best_len = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double len = (vertices[tri[(k + 1) % 3]] - vertices[tri[k]]).norm();
    if (len > best_len * (1.0 + 1e-12)) {
      best = k;
      best_len = len;
    }
  }
  std::rotate(tri.begin(), tri.begin() + best, tri.end());
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  build_topology();
  audit();
}

void Mesh::build_topology() {
  const int nv = num_vertices();
  const int ne = num_elements();

  area_.resize(ne);
  diameter_.resize(ne);
  std::vector<int> referenced(nv, 0);
  std::set<std::array<int, 3>> seen;
  for (int t = 0; t < ne; ++t) {
    const auto& e = elements_[t];
    for (int v : e) {
      if (v < 0 || v >= nv) {
        throw MeshError("element " + std::to_string(t) + " references invalid vertex " +
                        std::to_string(v));
      }
      ++referenced[v];
    }
    if (e[0] == e[1] || e[1] == e[2] || e[0] == e[2]) {
      throw MeshError("element " + std::to_string(t) + " has repeated vertices");
    }
    auto sorted = e;
    std::sort(sorted.begin(), sorted.end());
    if (!seen.insert(sorted).second) {
      throw MeshError("non-conforming mesh: duplicate element " + std::to_string(t));
    }
    const Point& a = vertices_[e[0]];
    const Point& b = vertices_[e[1]];
    const Point& c = vertices_[e[2]];
    area_[t] = signed_area(a, b, c);
    const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    if (!(area_[t] > 1e-14 * scale)) {
      throw MeshError("inverted or degenerate element " + std::to_string(t) +
                      " (signed area " + std::to_string(area_[t]) + ")");
    }
    diameter_[t] = std::sqrt(scale);
  }
  for (int v = 0; v < nv; ++v) {
    if (referenced[v] == 0) {
      throw MeshError("vertex " + std::to_string(v) + " is not referenced by any element");
    }
  }

  // Faces; the traversal direction within the first element fixes the normal.
  faces_.clear();
  element_faces_.assign(ne, {-1, -1, -1});
  std::unordered_map<std::uint64_t, int> face_of_edge;
  face_of_edge.reserve(static_cast<std::size_t>(3 * ne));
  for (int t = 0; t < ne; ++t) {
    const auto& e = elements_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = e[k];
      const int b = e[(k + 1) % 3];
      auto [it, inserted] = face_of_edge.try_emplace(edge_key(a, b), num_faces());
      if (inserted) {
        Face face;
        face.vertices = {std::min(a, b), std::max(a, b)};
        face.elements = {t, -1};
        const Point d = vertices_[b] - vertices_[a];
        face.normal = Point(d.y(), -d.x()) / d.norm();
        faces_.push_back(face);
      } else {
        Face& face = faces_[it->second];
        if (face.elements[1] >= 0) {
          throw MeshError("non-conforming mesh: edge " + edge_str(a, b) +
                          " shared by more than two elements");
        }
        // A shared edge must be traversed in opposite directions.
        const auto& first = elements_[face.elements[0]];
        for (int j = 0; j < 3; ++j) {
          if (first[j] == a && first[(j + 1) % 3] == b) {
            throw MeshError("non-conforming mesh: overlapping elements at edge " + edge_str(a, b));
          }
        }
        face.elements[1] = t;
      }
      element_faces_[t][k] = it->second;
    }
  }

  num_interior_faces_ = 0;
  boundary_vertex_.assign(nv, 0);
  for (const Face& f : faces_) {
    if (f.boundary()) {
      boundary_vertex_[f.vertices[0]] = 1;
      boundary_vertex_[f.vertices[1]] = 1;
    } else {
      ++num_interior_faces_;
    }
  }

  vertex_element_offsets_.assign(nv + 1, 0);
  for (const auto& e : elements_) {
    for (int v : e) ++vertex_element_offsets_[v + 1];
  }
  for (int v = 0; v < nv; ++v) vertex_element_offsets_[v + 1] += vertex_element_offsets_[v];
  vertex_element_list_.resize(vertex_element_offsets_[nv]);
  std::vector<int> fill(vertex_element_offsets_.begin(), vertex_element_offsets_.end() - 1);
  for (int t = 0; t < ne; ++t) {
    for (int v : elements_[t]) vertex_element_list_[fill[v]++] = t;
  }

  dof_of_vertex_.assign(nv, -1);
  vertex_of_dof_.clear();
  for (int v = 0; v < nv; ++v) {
    if (!boundary_vertex_[v]) {
      dof_of_vertex_[v] = static_cast<int>(vertex_of_dof_.size());
      vertex_of_dof_.push_back(v);
    }
  }
  num_free_ = static_cast<int>(vertex_of_dof_.size());
}

void Mesh::audit() const {
  // A hanging vertex sits in the interior of an edge that has only one
  // element; it is then a vertex of some element sharing an endpoint.
  for (const Face& f : faces_) {
    if (!f.boundary()) continue;
    const int a = f.vertices[0];
    const int b = f.vertices[1];
    const Point& pa = vertices_[a];
    const Point d = vertices_[b] - pa;
    const double len2 = d.squaredNorm();
    for (int t : vertex_elements(a)) {
      for (int v : elements_[t]) {
        if (v == a || v == b) continue;
        const Point w = vertices_[v] - pa;
        const double s = w.dot(d) / len2;
        if (s > 1e-12 && s < 1.0 - 1e-12 && std::abs(cross(d, w)) <= 1e-12 * len2) {
          throw MeshError("non-conforming mesh: hanging vertex " + std::to_string(v) +
                          " on edge " + edge_str(a, b));
        }
      }
    }
  }
}

std::span<const int> Mesh::vertex_elements(int v) const {
  if (v < 0 || v >= num_vertices()) {
    throw std::out_of_range("vertex index " + std::to_string(v) + " out of range");
  }
  return {vertex_element_list_.data() + vertex_element_offsets_[v],
          static_cast<std::size_t>(vertex_element_offsets_[v + 1] - vertex_element_offsets_[v])};
}

double Mesh::inscribed_diameter(int t) const {
  const auto& e = elements_[t];
  const double perimeter = (vertices_[e[1]] - vertices_[e[0]]).norm() +
                           (vertices_[e[2]] - vertices_[e[1]]).norm() +
                           (vertices_[e[0]] - vertices_[e[2]]).norm();
  return 4.0 * area_[t] / perimeter;
}

double Mesh::face_length(int f) const {
  const Face& face = faces_[f];
  return (vertices_[face.vertices[1]] - vertices_[face.vertices[0]]).norm();
}

double Mesh::face_diameter(int f) const {
  const Face& face = faces_[f];
  double h = diameter_[face.elements[0]];
  if (!face.boundary()) h = std::max(h, diameter_[face.elements[1]]);
  return h;
}

Point Mesh::face_midpoint(int f) const {
  const Face& face = faces_[f];
  return 0.5 * (vertices_[face.vertices[0]] + vertices_[face.vertices[1]]);
}

std::array<Point, 3> Mesh::barycentric_gradients(int t) const {
  const auto& e = elements_[t];
  std::array<Point, 3> g;
  const double inv2a = 0.5 / area_[t];
  for (int k = 0; k < 3; ++k) {
    const Point& a = vertices_[e[(k + 1) % 3]];
    const Point& b = vertices_[e[(k + 2) % 3]];
    // Rotated opposite edge, scaled by 1/(2|T|).
    g[k] = Point(a.y() - b.y(), b.x() - a.x()) * inv2a;
  }
  return g;
}

std::array<double, 3> Mesh::barycentric(int t, const Point& x) const {
  const auto& e = elements_[t];
  const Point& a = vertices_[e[0]];
  const Point& b = vertices_[e[1]];
  const Point& c = vertices_[e[2]];
  const double inv = 1.0 / (2.0 * area_[t]);
  const double l1 = cross(c - x, a - x) * inv;
  const double l2 = cross(a - x, b - x) * inv;
  return {1.0 - l1 - l2, l1, l2};
}

Point Mesh::centroid(int t) const {
  const auto& e = elements_[t];
  return (vertices_[e[0]] + vertices_[e[1]] + vertices_[e[2]]) / 3.0;
}

int Mesh::local_index(int t, int v) const {
  const auto& e = elements_[t];
  for (int k = 0; k < 3; ++k) {
    if (e[k] == v) return k;
  }
  return -1;
}

double Mesh::shape_metric() const {
  double sup = 0.0;
  for (int t = 0; t < num_elements(); ++t) {
    sup = std::max(sup, diameter_[t] / inscribed_diameter(t));
  }
  return sup;
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : area_) s += a;
  return s;
}

Point SqueezedTriangle::map(double s, double t) const {
  return vertices[0] + s * (vertices[1] - vertices[0]) + t * (vertices[2] - vertices[0]);
}

double SqueezedTriangle::area() const {
  return signed_area(vertices[0], vertices[1], vertices[2]);
}

std::array<double, 3> SqueezedTriangle::barycentric(const Point& x) const {
  // Through the parent (p, q, c): mu_q = l_q and mu_apex = l_c / theta. The
  // thin T_theta itself would lose a factor 1 / theta in accuracy.
  const Point& p = vertices[0];
  const Point c = p + (vertices[2] - p) / theta;
  const double inv = 1.0 / cross(vertices[1] - p, c - p);
  const double lq = cross(x - p, c - p) * inv;
  const double mc = cross(vertices[1] - p, x - p) * inv / theta;
  return {1.0 - lq - mc, lq, mc};
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path.string());
  long nv = 0;
  long ne = 0;
  if (!(in >> nv >> ne) || nv < 3 || ne < 1) {
    throw MeshError("parse error in " + path.string() + ": bad header (expected 'nv ne')");
  }
  std::vector<Point> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    double x = 0.0;
    double y = 0.0;
    if (!(in >> x >> y)) {
      throw MeshError("parse error in " + path.string() + ": vertex " + std::to_string(i));
    }
    vertices[i] = Point(x, y);
  }
  std::vector<std::array<int, 3>> elements(ne);
  for (long t = 0; t < ne; ++t) {
    auto& e = elements[t];
    if (!(in >> e[0] >> e[1] >> e[2])) {
      throw MeshError("parse error in " + path.string() + ": element " + std::to_string(t));
    }
  }
  std::string trailing;
  if (in >> trailing) {
    throw MeshError("parse error in " + path.string() + ": unexpected trailing data '" +
                    trailing + "'");
  }
  for (auto& e : elements) {
    for (int v : e) {
      if (v < 0 || v >= nv) {
        throw MeshError("parse error in " + path.string() + ": vertex index " +
                        std::to_string(v) + " out of range");
      }
    }
    // Degenerate triples are rejected by the Mesh constructor.
    if (e[0] != e[1] && e[1] != e[2] && e[0] != e[2]) rotate_longest_first(vertices, e);
  }
  return Mesh(std::move(vertices), std::move(elements));
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file: " + path.string());
  out << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& e : mesh.elements()) out << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
}

Mesh with_longest_edge_marking(const Mesh& mesh) {
  auto elements = mesh.elements();
  for (auto& e : elements) rotate_longest_first(mesh.vertices(), e);
  return Mesh(mesh.vertices(), std::move(elements));
}

Star star(const Mesh& mesh, int z) {
  Star s;
  s.center = z;
  const auto elems = mesh.vertex_elements(z);
  s.elements.assign(elems.begin(), elems.end());
  for (int t : s.elements) {
    for (int f : mesh.element_faces(t)) {
      const Face& face = mesh.face(f);
      if (face.vertices[0] == z || face.vertices[1] == z) s.faces.push_back(f);
    }
  }
  std::sort(s.faces.begin(), s.faces.end());
  s.faces.erase(std::unique(s.faces.begin(), s.faces.end()), s.faces.end());
  s.on_boundary = mesh.is_boundary_vertex(z);
  return s;
}

Mesh bisect(const Mesh& mesh, std::span<const int> marked) {
  if (marked.empty()) return mesh;
  std::vector<char> edge_marked(mesh.num_faces(), 0);
  for (int t : marked) {
    if (t < 0 || t >= mesh.num_elements()) {
      throw std::out_of_range("marked element " + std::to_string(t) + " out of range");
    }
    edge_marked[mesh.element_faces(t)[0]] = 1;
  }
  // Closure: an element with any marked edge must have its refinement edge marked.
  for (bool changed = true; changed;) {
    changed = false;
    for (int t = 0; t < mesh.num_elements(); ++t) {
      const auto& ef = mesh.element_faces(t);
      if (!edge_marked[ef[0]] && (edge_marked[ef[1]] || edge_marked[ef[2]])) {
        edge_marked[ef[0]] = 1;
        changed = true;
      }
    }
  }

  std::vector<Point> vertices = mesh.vertices();
  std::vector<int> midpoint(mesh.num_faces(), -1);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!edge_marked[f]) continue;
    midpoint[f] = static_cast<int>(vertices.size());
    vertices.push_back(mesh.face_midpoint(f));
  }

  std::vector<std::array<int, 3>> elements;
  elements.reserve(mesh.num_elements() + 2 * std::count(edge_marked.begin(), edge_marked.end(), 1));
  for (int t = 0; t < mesh.num_elements(); ++t) {
    const auto& e = mesh.element(t);
    const auto& ef = mesh.element_faces(t);
    if (!edge_marked[ef[0]]) {
      elements.push_back(e);
      continue;
    }
    const int m = midpoint[ef[0]];
    // Children (v2, v0, m) and (v1, v2, m); their refinement edges are the
    // parent's edges 2 and 1.
    if (edge_marked[ef[2]]) {
      const int m2 = midpoint[ef[2]];
      elements.push_back({m, e[2], m2});
      elements.push_back({e[0], m, m2});
    } else {
      elements.push_back({e[2], e[0], m});
    }
    if (edge_marked[ef[1]]) {
      const int m1 = midpoint[ef[1]];
      elements.push_back({m, e[1], m1});
      elements.push_back({e[2], m, m1});
    } else {
      elements.push_back({e[1], e[2], m});
    }
  }
  return Mesh(std::move(vertices), std::move(elements));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.num_elements());
  for (int t = 0; t < mesh.num_elements(); ++t) all[t] = t;
  Mesh once = bisect(mesh, all);
  all.resize(once.num_elements());
  for (int t = 0; t < once.num_elements(); ++t) all[t] = t;
  return bisect(once, all);
}

SqueezedTriangle squeeze_element(const Mesh& mesh, int t, int f, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("squeeze factor must lie in (0, 1], got " + std::to_string(theta));
  }
  const auto& ef = mesh.element_faces(t);
  int k = -1;
  for (int j = 0; j < 3; ++j) {
    if (ef[j] == f) k = j;
  }
  if (k < 0) {
    throw std::invalid_argument("face " + std::to_string(f) + " is not a face of element " +
                                std::to_string(t));
  }
  const auto& e = mesh.element(t);
  SqueezedTriangle s;
  s.element = t;
  s.face = f;
  s.theta = theta;
  s.parent_local = {k, (k + 1) % 3, (k + 2) % 3};
  const Point& p = mesh.vertex(e[s.parent_local[0]]);
  const Point& q = mesh.vertex(e[s.parent_local[1]]);
  const Point& c = mesh.vertex(e[s.parent_local[2]]);
  s.vertices = {p, q, theta == 1.0 ? c : Point(p + theta * (c - p))};
  return s;
}

Mesh rectangle_mesh(int n, Diagonal pattern, double x0, double x1, double y0, double y1) {
  if (n < 1) throw std::invalid_argument("rectangle_mesh: n must be >= 1");
  std::vector<Point> vertices;
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * j / n);
    }
  }
  std::vector<std::array<int, 3>> elements;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j);
      const int b = id(i + 1, j);
      const int c = id(i + 1, j + 1);
      const int d = id(i, j + 1);
      if (pattern == Diagonal::kRight) {
        elements.push_back({a, b, c});
        elements.push_back({a, c, d});
      } else {
        const int m = static_cast<int>(vertices.size());
        vertices.push_back(0.25 * (vertices[a] + vertices[b] + vertices[c] + vertices[d]));
        elements.push_back({a, b, m});
        elements.push_back({b, c, m});
        elements.push_back({c, d, m});
        elements.push_back({d, a, m});
      }
    }
  }
  for (auto& e : elements) rotate_longest_first(vertices, e);
  return Mesh(std::move(vertices), std::move(elements));
}

Mesh lshape_mesh(int n) {
  if (n < 1) throw std::invalid_argument("lshape_mesh: n must be >= 1");
  const int m = 2 * n;
  std::map<std::pair<int, int>, int> index;
  std::vector<Point> vertices;
  const auto id = [&](int i, int j) {
    auto [it, inserted] = index.try_emplace({i, j}, static_cast<int>(vertices.size()));
    if (inserted) vertices.emplace_back(-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m);
    return it->second;
  };
  std::vector<std::array<int, 3>> elements;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i >= n && j < n) continue;
      const int a = id(i, j);
      const int b = id(i + 1, j);
      const int c = id(i + 1, j + 1);
      const int d = id(i, j + 1);
      elements.push_back({a, b, c});
      elements.push_back({a, c, d});
    }
  }
  for (auto& e : elements) rotate_longest_first(vertices, e);
  return Mesh(std::move(vertices), std::move(elements));
}

}  // namespace rdest
