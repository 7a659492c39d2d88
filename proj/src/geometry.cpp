#include "gtdd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gtdd/errors.hpp"

namespace gtdd {

namespace {
void check_coords(const std::vector<double>& c, const char* name) {
  if (c.size() < 2)
    throw InvalidGrid(std::string(name) + " coordinates need at least 2 entries");
  for (size_t i = 0; i + 1 < c.size(); ++i)
    if (!(c[i] < c[i + 1]))
      throw InvalidGrid(std::string(name) + " coordinates must be strictly increasing");
}
} // namespace

Mesh Mesh::build(std::vector<double> x_coords, std::vector<double> y_coords,
                 const BoundarySpec& bc) {
  check_coords(x_coords, "x");
  check_coords(y_coords, "y");

  Mesh m;
  m.xs = std::move(x_coords);
  m.ys = std::move(y_coords);
  m.nx = static_cast<int>(m.xs.size()) - 1;
  m.ny = static_cast<int>(m.ys.size()) - 1;
  m.boundary_spec = bc;

  const int nx = m.nx, ny = m.ny;
  m.elements.resize(static_cast<size_t>(nx) * ny);

  // Vertical edges: (nx+1) x ny, then horizontal: nx x (ny+1); afterwards
  // all edges are renumbered lexicographically by midpoint.
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(nx + 1) * ny + static_cast<size_t>(nx) * (ny + 1));
  auto vid = [&](int ix, int iy) { return iy * (nx + 1) + ix; };
  auto hid = [&](int ix, int iy) { return (nx + 1) * ny + iy * nx + ix; };

  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix) {
      Edge e;
      e.vertical = true;
      e.length = m.ys[iy + 1] - m.ys[iy];
      e.mx = m.xs[ix];
      e.my = 0.5 * (m.ys[iy] + m.ys[iy + 1]);
      e.elem_neg = ix > 0 ? m.elem_id(ix - 1, iy) : -1;
      e.elem_pos = ix < nx ? m.elem_id(ix, iy) : -1;
      e.btag = (ix == 0) ? bc.left : bc.right;
      edges.push_back(e);
    }
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      Edge e;
      e.vertical = false;
      e.length = m.xs[ix + 1] - m.xs[ix];
      e.mx = 0.5 * (m.xs[ix] + m.xs[ix + 1]);
      e.my = m.ys[iy];
      e.elem_neg = iy > 0 ? m.elem_id(ix, iy - 1) : -1;
      e.elem_pos = iy < ny ? m.elem_id(ix, iy) : -1;
      e.btag = (iy == 0) ? bc.bottom : bc.top;
      edges.push_back(e);
    }

  std::vector<int> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (edges[a].mx != edges[b].mx) return edges[a].mx < edges[b].mx;
    return edges[a].my < edges[b].my;
  });
  std::vector<int> newid(edges.size());
  for (size_t k = 0; k < order.size(); ++k) newid[order[k]] = static_cast<int>(k);
  m.edges.resize(edges.size());
  for (size_t k = 0; k < edges.size(); ++k) m.edges[newid[k]] = edges[k];

  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      Element& K = m.elements[m.elem_id(ix, iy)];
      K.x0 = m.xs[ix];
      K.x1 = m.xs[ix + 1];
      K.y0 = m.ys[iy];
      K.y1 = m.ys[iy + 1];
      K.edge[kLeft] = newid[vid(ix, iy)];
      K.edge[kRight] = newid[vid(ix + 1, iy)];
      K.edge[kBottom] = newid[hid(ix, iy)];
      K.edge[kTop] = newid[hid(ix, iy + 1)];
    }
  return m;
}

Mesh Mesh::uniform(int nx, int ny, double x0, double x1, double y0, double y1,
                   const BoundarySpec& bc) {
  if (nx < 1 || ny < 1) throw InvalidGrid("uniform mesh needs nx, ny >= 1");
  std::vector<double> xs(nx + 1), ys(ny + 1);
  for (int i = 0; i <= nx; ++i) xs[i] = x0 + (x1 - x0) * static_cast<double>(i) / nx;
  for (int j = 0; j <= ny; ++j) ys[j] = y0 + (y1 - y0) * static_cast<double>(j) / ny;
  xs.back() = x1;
  ys.back() = y1;
  return build(std::move(xs), std::move(ys), bc);
}

int Mesh::find_line(const std::vector<double>& coords, double v) {
  const double tol = 1e-12 * std::max(1.0, std::abs(coords.back() - coords.front()));
  for (size_t i = 0; i < coords.size(); ++i)
    if (std::abs(coords[i] - v) <= tol) return static_cast<int>(i);
  return -1;
}

Decomposition Decomposition::build(const Mesh& mesh, const std::vector<Box>& boxes) {
  if (boxes.empty()) throw InvalidPartition("decomposition needs at least one box");
  for (const Box& b : boxes) {
    if (Mesh::find_line(mesh.xs, b.x0) < 0 || Mesh::find_line(mesh.xs, b.x1) < 0 ||
        Mesh::find_line(mesh.ys, b.y0) < 0 || Mesh::find_line(mesh.ys, b.y1) < 0)
      throw MisalignedPartition("subdomain box edges must lie on grid lines");
  }

  Decomposition d;
  const int ns = static_cast<int>(boxes.size());
  d.elems_of.resize(ns);
  d.subdomain_of.assign(mesh.n_elements(), -1);
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const Element& K = mesh.elements[k];
    for (int s = 0; s < ns; ++s) {
      if (boxes[s].contains(K.xc(), K.yc())) {
        if (d.subdomain_of[k] >= 0)
          throw InvalidPartition("subdomain boxes overlap");
        d.subdomain_of[k] = s;
      }
    }
    if (d.subdomain_of[k] < 0)
      throw InvalidPartition("subdomain boxes leave a gap in the domain");
    d.elems_of[d.subdomain_of[k]].push_back(k);
  }
  for (int s = 0; s < ns; ++s)
    if (d.elems_of[s].empty()) throw InvalidPartition("empty subdomain box");

  std::map<std::pair<int, int>, InterfacePair> pairs;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& E = mesh.edges[e];
    if (E.boundary()) continue;
    int a = d.subdomain_of[E.elem_neg], b = d.subdomain_of[E.elem_pos];
    if (a == b) continue;
    int i = std::min(a, b), j = std::max(a, b);
    auto& p = pairs[{i, j}];
    p.i = i;
    p.j = j;
    p.edges.push_back(e); // global edge order: already ascending in e
    p.elem_in_i.push_back(a == i ? E.elem_neg : E.elem_pos);
    p.elem_in_j.push_back(a == j ? E.elem_neg : E.elem_pos);
  }
  d.neighbors.resize(ns);
  for (auto& [key, p] : pairs) {
    d.neighbors[p.i].push_back(p.j);
    d.neighbors[p.j].push_back(p.i);
    d.pairs.push_back(std::move(p));
  }
  for (auto& nb : d.neighbors) std::sort(nb.begin(), nb.end());
  return d;
}

int Decomposition::pair_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (size_t p = 0; p < pairs.size(); ++p)
    if (pairs[p].i == i && pairs[p].j == j) return static_cast<int>(p);
  return -1;
}

} // namespace gtdd
