#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rdest {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An edge of the triangulation. Interior faces have two adjacent elements
/// stored with elements[0] < elements[1]; the unit normal points from
/// elements[0] into elements[1]. Boundary faces store elements[1] == -1 and
/// carry the outward normal.
struct Face {
  std::array<int, 2> vertices{};  // ascending
  std::array<int, 2> elements{-1, -1};
  Point normal = Point::Zero();

  [[nodiscard]] bool boundary() const { return elements[1] < 0; }
};

/// The star omega_z of a vertex and its skeleton sigma_z.
struct Star {
  int center = -1;
  std::vector<int> elements;
  std::vector<int> faces;
  bool on_boundary = false;
};

/// Conforming triangulation of a polygonal domain.
///
/// Elements are counter-clockwise vertex triples. Local edge k joins local
/// vertices k and (k+1)%3; local edge 0 is the refinement edge used by
/// newest-vertex bisection, so local vertex 2 is the newest vertex.
class Mesh {
 public:
  Mesh() = default;

  /// Builds the full topology and audits it. Throws MeshError on inverted
  /// elements, edges shared by more than two elements or hanging vertices.
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements);

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int num_elements() const { return static_cast<int>(elements_.size()); }
  [[nodiscard]] int num_faces() const { return static_cast<int>(faces_.size()); }
  [[nodiscard]] int num_interior_faces() const { return num_interior_faces_; }
  [[nodiscard]] int num_free_vertices() const { return num_free_; }

  [[nodiscard]] const Point& vertex(int v) const { return vertices_[v]; }
  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const std::array<int, 3>& element(int t) const { return elements_[t]; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  [[nodiscard]] const std::array<int, 3>& element_faces(int t) const { return element_faces_[t]; }
  [[nodiscard]] const Face& face(int f) const { return faces_[f]; }
  [[nodiscard]] std::span<const int> vertex_elements(int v) const;
  [[nodiscard]] bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

  /// Index of vertex v among the free (interior) vertices, or -1 on the boundary.
  [[nodiscard]] int dof(int v) const { return dof_of_vertex_[v]; }
  [[nodiscard]] int dof_vertex(int d) const { return vertex_of_dof_[d]; }

  [[nodiscard]] double area(int t) const { return area_[t]; }
  /// Longest edge length h_T.
  [[nodiscard]] double diameter(int t) const { return diameter_[t]; }
  /// Diameter of the inscribed circle rho_T.
  [[nodiscard]] double inscribed_diameter(int t) const;
  [[nodiscard]] double face_length(int f) const;
  /// h_F = max of h_T over the elements adjacent to F.
  [[nodiscard]] double face_diameter(int f) const;
  [[nodiscard]] Point face_midpoint(int f) const;

  /// Gradients of the three barycentric coordinates of element t.
  [[nodiscard]] std::array<Point, 3> barycentric_gradients(int t) const;
  [[nodiscard]] std::array<double, 3> barycentric(int t, const Point& x) const;
  [[nodiscard]] Point centroid(int t) const;
  /// Local position (0..2) of vertex v in element t, or -1.
  [[nodiscard]] int local_index(int t, int v) const;

  /// sup_T h_T / rho_T.
  [[nodiscard]] double shape_metric() const;
  [[nodiscard]] double total_area() const;

 private:
  void build_topology();
  void audit() const;

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<std::array<int, 3>> element_faces_;
  std::vector<Face> faces_;
  std::vector<int> vertex_element_offsets_;
  std::vector<int> vertex_element_list_;
  std::vector<char> boundary_vertex_;
  std::vector<int> dof_of_vertex_;
  std::vector<int> vertex_of_dof_;
  std::vector<double> area_;
  std::vector<double> diameter_;
  int num_interior_faces_ = 0;
  int num_free_ = 0;
};

/// Element T compressed towards one of its faces F by the factor theta.
///
/// With T = (p, q, c) counter-clockwise and F = (p, q), the orientation
/// preserving map sending the reference face x_2 = 0 onto F fixes p as the
/// image of the reference origin, so the squeezed apex is p + theta (c - p).
struct SqueezedTriangle {
  int element = -1;
  int face = -1;
  double theta = 1.0;
  /// Vertices (p, q, apex) of T_theta, counter-clockwise; (p, q) spans F.
  std::array<Point, 3> vertices;
  /// Local indices in the parent element of p, q and the original apex.
  std::array<int, 3> parent_local{};

  /// Image of the reference point (s, t) of the unit triangle.
  [[nodiscard]] Point map(double s, double t) const;
  [[nodiscard]] double area() const;
  /// Barycentric coordinates with respect to (p, q, apex).
  [[nodiscard]] std::array<double, 3> barycentric(const Point& x) const;
};

[[nodiscard]] Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Rotates every element so that its longest edge is the refinement edge.
[[nodiscard]] Mesh with_longest_edge_marking(const Mesh& mesh);

[[nodiscard]] Star star(const Mesh& mesh, int z);

/// Newest-vertex bisection of the marked elements with conforming closure.
[[nodiscard]] Mesh bisect(const Mesh& mesh, std::span<const int> marked);
/// Bisects every element twice, halving all mesh sizes.
[[nodiscard]] Mesh refine_uniform(const Mesh& mesh);

[[nodiscard]] SqueezedTriangle squeeze_element(const Mesh& mesh, int t, int f, double theta);

enum class Diagonal { kRight, kCrissCross };

/// Structured triangulation of [x0,x1] x [y0,y1] with n x n cells.
[[nodiscard]] Mesh rectangle_mesh(int n, Diagonal pattern, double x0 = 0.0, double x1 = 1.0,
                                  double y0 = 0.0, double y1 = 1.0);
/// L-shaped domain (-1,1)^2 \ [0,1) x (-1,0] with 3 n^2 cells.
[[nodiscard]] Mesh lshape_mesh(int n);

}  // namespace rdest
