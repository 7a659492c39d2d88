#pragma once

#include <array>
#include <vector>

namespace gtdd {

enum class ExteriorBC { Dirichlet, Neumann };

/// Boundary-condition kind per side of the rectangular domain.
struct BoundarySpec {
  ExteriorBC left = ExteriorBC::Dirichlet;
  ExteriorBC right = ExteriorBC::Dirichlet;
  ExteriorBC bottom = ExteriorBC::Dirichlet;
  ExteriorBC top = ExteriorBC::Dirichlet;
};

/// Local edge slots of a rectangular element, in basis order.
enum LocalSide { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

/// Outward sign n_K . n_E per local slot; edge normals are +x (vertical
/// edges) and +y (horizontal edges).
constexpr std::array<double, 4> kOutwardSign{-1.0, +1.0, -1.0, +1.0};

struct Element {
  double x0, x1, y0, y1;
  std::array<int, 4> edge; // global edge ids, slots L,R,B,T
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double xc() const { return 0.5 * (x0 + x1); }
  double yc() const { return 0.5 * (y0 + y1); }
};

struct Edge {
  double length;
  double mx, my;     // midpoint
  bool vertical;     // normal +x if vertical, +y if horizontal
  int elem_neg = -1; // element on the side the normal points away from
  int elem_pos = -1; // element on the side the normal points into
  ExteriorBC btag = ExteriorBC::Dirichlet; // meaningful for boundary edges
  bool boundary() const { return elem_neg < 0 || elem_pos < 0; }
  int the_element() const { return elem_neg >= 0 ? elem_neg : elem_pos; }
};

/// Axis-aligned rectangular mesh with globally indexed, deterministically
/// ordered edges (lexicographic by midpoint).
class Mesh {
public:
  static Mesh build(std::vector<double> x_coords, std::vector<double> y_coords,
                    const BoundarySpec& bc = {});
  static Mesh uniform(int nx, int ny, double x0, double x1, double y0, double y1,
                      const BoundarySpec& bc = {});

  int nx = 0, ny = 0;
  std::vector<double> xs, ys;
  std::vector<Element> elements;
  std::vector<Edge> edges;
  BoundarySpec boundary_spec;

  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  double domain_area() const { return (xs.back() - xs.front()) * (ys.back() - ys.front()); }
  int elem_id(int ix, int iy) const { return iy * nx + ix; }

  /// Index of the grid line equal to v (within tolerance), or -1.
  static int find_line(const std::vector<double>& coords, double v);
};

struct Box {
  double x0, x1, y0, y1;
  bool contains(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
};

/// Edges shared by one unordered pair of subdomains, in global edge order.
struct InterfacePair {
  int i, j; // i < j
  std::vector<int> edges;     // global edge ids
  std::vector<int> elem_in_i; // element adjacent from subdomain i, per edge
  std::vector<int> elem_in_j;
};

/// Nonoverlapping partition of the mesh into axis-aligned boxes.
class Decomposition {
public:
  static Decomposition build(const Mesh& mesh, const std::vector<Box>& boxes);

  int n_subdomains() const { return static_cast<int>(elems_of.size()); }
  std::vector<std::vector<int>> elems_of;  // global element ids per subdomain
  std::vector<int> subdomain_of;           // per global element
  std::vector<InterfacePair> pairs;        // sorted by (i,j)
  std::vector<std::vector<int>> neighbors; // N_i, ascending

  int pair_index(int i, int j) const; // -1 if not adjacent
};

} // namespace gtdd
