#include "aperture/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aperture/quadrature.hpp"

namespace aperture::geo {

using quad::triangle_area;

double ApertureSpec::analytic_area() const {
  if (const auto* d = std::get_if<Disc>(&shape)) return kPi * d->radius * d->radius;
  if (const auto* r = std::get_if<Rectangle>(&shape))
    return 4.0 * r->half_width_x * r->half_width_y;
  const auto& poly = std::get<Polygon>(shape).vertices;
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double ApertureSpec::diameter() const {
  if (const auto* d = std::get_if<Disc>(&shape)) return 2.0 * d->radius;
  if (const auto* r = std::get_if<Rectangle>(&shape))
    return 2.0 * std::hypot(r->half_width_x, r->half_width_y);
  const auto& poly = std::get<Polygon>(shape).vertices;
  double dmax = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j)
      dmax = std::max(dmax, (poly[i] - poly[j]).norm());
  return dmax;
}

namespace {

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  auto cross = [](const Vec2& u, const Vec2& v) {
    return u.x() * v.y() - u.y() * v.x();
  };
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

void ApertureSpec::validate() const {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    if (!(d->radius > 0)) throw std::invalid_argument("disc radius must be positive");
    return;
  }
  if (const auto* r = std::get_if<Rectangle>(&shape)) {
    if (!(r->half_width_x > 0) || !(r->half_width_y > 0))
      throw std::invalid_argument("rectangle half-widths must be positive");
    return;
  }
  const auto& poly = std::get<Polygon>(shape).vertices;
  const std::size_t n = poly.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  const double scale = diameter();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((poly[i] - poly[j]).norm() < 1e-12 * scale)
        throw std::invalid_argument("polygon has a repeated vertex");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip edges sharing an endpoint.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j],
                             poly[(j + 1) % n]))
        throw std::invalid_argument("polygon is self-intersecting");
    }
  }
  if (std::abs(analytic_area()) < 1e-14 * scale * scale)
    throw std::invalid_argument("polygon has zero area");
}

double ApertureMesh::cell_area(int cell) const {
  return triangle_area(vertex_of(cell, 0), vertex_of(cell, 1), vertex_of(cell, 2));
}

Vec2 ApertureMesh::cell_centroid(int cell) const {
  return (vertex_of(cell, 0) + vertex_of(cell, 1) + vertex_of(cell, 2)) / 3.0;
}

double ApertureMesh::cell_diameter(int cell) const {
  const Vec2 a = vertex_of(cell, 0), b = vertex_of(cell, 1), c = vertex_of(cell, 2);
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

double ApertureMesh::edge_length(int e) const {
  return (vertices[edges[e][0]] - vertices[edges[e][1]]).norm();
}

double ApertureMesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c) a += cell_area(c);
  return a;
}

double ApertureMesh::min_angle_deg() const {
  double worst = 180.0;
  for (int c = 0; c < n_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 p = vertex_of(c, i);
      const Vec2 u = (vertex_of(c, (i + 1) % 3) - p).normalized();
      const Vec2 v = (vertex_of(c, (i + 2) % 3) - p).normalized();
      worst = std::min(worst, std::acos(std::clamp(u.dot(v), -1.0, 1.0)) * 180.0 / kPi);
    }
  }
  return worst;
}

double ApertureMesh::diameter() const {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const auto& v : vertices) {
    lo_x = std::min(lo_x, v.x());
    hi_x = std::max(hi_x, v.x());
    lo_y = std::min(lo_y, v.y());
    hi_y = std::max(hi_y, v.y());
  }
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

void ApertureMesh::finalize() {
  edges.clear();
  cell_edges.assign(cells.size(), {-1, -1, -1});
  cell_edge_sign.assign(cells.size(), {0, 0, 0});

  std::map<std::pair<int, int>, int> edge_index;
  edge_cells.clear();
  for (int c = 0; c < n_cells(); ++c) {
    if (cell_area(c) <= 0.0)
      throw std::runtime_error("mesh cell with non-positive area");
    for (int i = 0; i < 3; ++i) {
      // Local edge i runs from vertex i+1 to vertex i+2 (ccw traversal).
      const int a = cells[c][(i + 1) % 3];
      const int b = cells[c][(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_index.find(key);
      if (it == edge_index.end()) {
        it = edge_index.emplace(key, static_cast<int>(edges.size())).first;
        edges.push_back({key.first, key.second});
        edge_cells.push_back(0);
      }
      const int e = it->second;
      cell_edges[c][i] = e;
      // ccw traversal a->b has outward normal rot(-90)(b - a); the global
      // normal is rot(-90)(head - tail), so the sign is +1 when a == tail.
      cell_edge_sign[c][i] = (a == key.first) ? 1 : -1;
      edge_cells[e] += 1;
    }
  }
  for (int e = 0; e < n_edges(); ++e) {
    if (edge_cells[e] < 1 || edge_cells[e] > 2)
      throw std::runtime_error("non-manifold edge in mesh");
  }
  // Interior edges must be traversed in opposite directions by their two
  // cells; with ccw cells this is automatic, but check anyway.
  std::vector<int> sign_sum(n_edges(), 0), seen(n_edges(), 0);
  for (int c = 0; c < n_cells(); ++c)
    for (int i = 0; i < 3; ++i) {
      sign_sum[cell_edges[c][i]] += cell_edge_sign[c][i];
      seen[cell_edges[c][i]] += 1;
    }
  for (int e = 0; e < n_edges(); ++e)
    if (seen[e] == 2 && sign_sum[e] != 0)
      throw std::runtime_error("interior edge with equal relative signs");

  vertex_on_boundary.assign(vertices.size(), false);
  for (int e = 0; e < n_edges(); ++e)
    if (edge_cells[e] == 1) {
      vertex_on_boundary[edges[e][0]] = true;
      vertex_on_boundary[edges[e][1]] = true;
    }

  h = 0.0;
  for (int e = 0; e < n_edges(); ++e) h = std::max(h, edge_length(e));
}

namespace {

// Widths of the radial (or 1D) layers from the domain interior toward the
// boundary; graded tail has widths h*q, ..., h*q^levels.
std::vector<double> graded_widths(double extent, double h, double q, int levels) {
  std::vector<double> tail;
  double graded = 0.0;
  for (int j = 1; j <= levels; ++j) {
    tail.push_back(h * std::pow(q, j));
    graded += tail.back();
  }
  if (graded >= 0.6 * extent) throw std::invalid_argument(
      "grading consumes most of the domain; reduce levels or increase h");
  const double core = extent - graded;
  const int n_core = std::max(1, static_cast<int>(std::round(core / h)));
  std::vector<double> widths(n_core, core / n_core);
  widths.insert(widths.end(), tail.begin(), tail.end());
  return widths;
}

ApertureMesh mesh_disc(double radius, double h, const MeshOptions& opt) {
  ApertureMesh mesh;
  const auto widths = graded_widths(radius, h, opt.grading_ratio, opt.grading_levels);

  // Concentric rings; angular count starts at 6 and doubles (conforming
  // 1-to-2 strips) whenever the arc spacing would exceed the target h.
  std::vector<double> radii{0.0};
  for (double w : widths) radii.push_back(radii.back() + w);
  radii.back() = radius;

  const int n_rings = static_cast<int>(radii.size()) - 1;
  std::vector<int> counts(n_rings + 1, 0);
  counts[0] = 1;  // center vertex
  int n = 6;
  for (int m = 1; m <= n_rings; ++m) {
    while (2.0 * kPi * radii[m] / n > 1.1 * h) n *= 2;
    counts[m] = n;
  }

  std::vector<int> ring_start(n_rings + 1, 0);
  mesh.vertices.push_back(Vec2(0, 0));
  for (int m = 1; m <= n_rings; ++m) {
    ring_start[m] = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < counts[m]; ++i) {
      const double t = 2.0 * kPi * i / counts[m];
      mesh.vertices.push_back(radii[m] * Vec2(std::cos(t), std::sin(t)));
    }
  }

  // Center fan.
  for (int i = 0; i < counts[1]; ++i)
    mesh.cells.push_back({0, ring_start[1] + i, ring_start[1] + (i + 1) % counts[1]});

  for (int m = 1; m < n_rings; ++m) {
    const int ni = counts[m], no = counts[m + 1];
    const int si = ring_start[m], so = ring_start[m + 1];
    if (no == ni) {
      for (int i = 0; i < ni; ++i) {
        const int a = si + i, a1 = si + (i + 1) % ni;
        const int b = so + i, b1 = so + (i + 1) % ni;
        mesh.cells.push_back({a, b, b1});
        mesh.cells.push_back({a, b1, a1});
      }
    } else if (no == 2 * ni) {
      for (int i = 0; i < ni; ++i) {
        const int a = si + i, a1 = si + (i + 1) % ni;
        const int b0 = so + 2 * i, b1 = so + 2 * i + 1, b2 = so + (2 * i + 2) % no;
        mesh.cells.push_back({a, b0, b1});
        mesh.cells.push_back({a, b1, a1});
        mesh.cells.push_back({a1, b1, b2});
      }
    } else {
      throw std::runtime_error("disc mesher: unsupported ring transition");
    }
  }
  mesh.finalize();
  return mesh;
}

std::vector<double> graded_axis(double half_width, double h, double q, int levels) {
  // Symmetric point set on [-a, a], graded toward both ends.
  const auto widths = graded_widths(half_width, h, q, levels);
  std::vector<double> pts{0.0};
  for (double w : widths) pts.push_back(pts.back() + w);
  pts.back() = half_width;
  std::vector<double> axis;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) axis.push_back(-*it);
  for (std::size_t i = 1; i < pts.size(); ++i) axis.push_back(pts[i]);
  return axis;
}

ApertureMesh mesh_rectangle(double wx, double wy, double h, const MeshOptions& opt) {
  ApertureMesh mesh;
  const auto xs = graded_axis(wx, h, opt.grading_ratio, opt.grading_levels);
  const auto ys = graded_axis(wy, h, opt.grading_ratio, opt.grading_levels);
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mesh.vertices.push_back(Vec2(xs[i], ys[j]));
  auto idx = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int v00 = idx(i, j), v10 = idx(i + 1, j);
      const int v01 = idx(i, j + 1), v11 = idx(i + 1, j + 1);
      mesh.cells.push_back({v00, v10, v11});
      mesh.cells.push_back({v00, v11, v01});
    }
  }
  mesh.finalize();
  return mesh;
}

ApertureMesh mesh_polygon(const Polygon& poly_in, double h) {
  std::vector<Vec2> poly = poly_in.vertices;
  {
    double a2 = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& p = poly[i];
      const Vec2& q = poly[(i + 1) % poly.size()];
      a2 += p.x() * q.y() - q.x() * p.y();
    }
    if (a2 < 0) std::reverse(poly.begin(), poly.end());
  }

  // Ear clipping, then uniform 4-way refinement until h is met.
  ApertureMesh mesh;
  mesh.vertices = poly;
  std::vector<int> ring(poly.size());
  for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int>(i);
  auto is_ear = [&](int ia, int ib, int ic) {
    const Vec2 &a = poly[ia], &b = poly[ib], &c = poly[ic];
    if (triangle_area(a, b, c) <= 0) return false;
    for (int v : ring) {
      if (v == ia || v == ib || v == ic) continue;
      const Vec2& p = poly[v];
      if (triangle_area(a, b, p) > 0 && triangle_area(b, c, p) > 0 &&
          triangle_area(c, a, p) > 0)
        return false;
    }
    return true;
  };
  while (ring.size() > 3) {
    bool clipped = false;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const int ia = ring[(i + ring.size() - 1) % ring.size()];
      const int ib = ring[i];
      const int ic = ring[(i + 1) % ring.size()];
      if (is_ear(ia, ib, ic)) {
        mesh.cells.push_back({ia, ib, ic});
        ring.erase(ring.begin() + i);
        clipped = true;
        break;
      }
    }
    if (!clipped) throw std::runtime_error("ear clipping failed (degenerate polygon)");
  }
  mesh.cells.push_back({ring[0], ring[1], ring[2]});

  auto longest_edge = [&mesh]() {
    double L = 0.0;
    for (const auto& c : mesh.cells)
      for (int i = 0; i < 3; ++i)
        L = std::max(L, (mesh.vertices[c[i]] - mesh.vertices[c[(i + 1) % 3]]).norm());
    return L;
  };
  while (longest_edge() > h) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it == midpoint.end()) {
        mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
        it = midpoint.emplace(key, static_cast<int>(mesh.vertices.size() - 1)).first;
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> fine;
    fine.reserve(mesh.cells.size() * 4);
    for (const auto& c : mesh.cells) {
      const int m01 = mid(c[0], c[1]), m12 = mid(c[1], c[2]), m20 = mid(c[2], c[0]);
      fine.push_back({c[0], m01, m20});
      fine.push_back({c[1], m12, m01});
      fine.push_back({c[2], m20, m12});
      fine.push_back({m01, m12, m20});
    }
    mesh.cells = std::move(fine);
  }
  mesh.finalize();
  return mesh;
}

}  // namespace

ApertureMesh build_mesh(const ApertureSpec& spec, double h, const MeshOptions& options) {
  spec.validate();
  if (!(h > 0)) throw std::invalid_argument("mesh parameter h must be positive");
  if (h >= spec.diameter())
    throw std::invalid_argument("mesh parameter h must be below the aperture diameter");

  // Strip diagonals exceed the ring spacing; rebuild with a shrunken target
  // until the longest edge honors the requested mesh parameter.
  auto generate = [&](double h_eff) {
    if (const auto* d = std::get_if<Disc>(&spec.shape))
      return mesh_disc(d->radius, h_eff, options);
    if (const auto* r = std::get_if<Rectangle>(&spec.shape))
      return mesh_rectangle(r->half_width_x, r->half_width_y, h_eff, options);
    return mesh_polygon(std::get<Polygon>(spec.shape), h_eff);
  };
  double h_eff = h;
  ApertureMesh mesh = generate(h_eff);
  for (int attempt = 0; attempt < 40 && mesh.h > h; ++attempt) {
    h_eff *= std::min(0.97, h / mesh.h * 0.99);
    mesh = generate(h_eff);
  }
  if (mesh.h > h)
    throw std::runtime_error("mesher could not honor the requested mesh parameter");

  if (mesh.min_angle_deg() < options.min_angle_deg)
    throw std::runtime_error("mesh quality below configured minimum angle");
  return mesh;
}

DofTable build_dofs(const ApertureMesh& mesh) {
  DofTable dofs;
  dofs.edge_dof.assign(mesh.n_edges(), -1);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge_cells[e] == 2) {
      dofs.edge_dof[e] = dofs.n_vector++;
      dofs.dof_edge.push_back(e);
    }
  }
  dofs.n_scalar = mesh.n_cells();
  dofs.vertex_dof.assign(mesh.n_vertices(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!mesh.vertex_on_boundary[v]) {
      dofs.vertex_dof[v] = dofs.n_multiplier++;
      dofs.dof_vertex.push_back(v);
    }
  }
  return dofs;
}

std::string mesh_to_json(const ApertureMesh& mesh) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices) j["vertices"].push_back({v.x(), v.y()});
  j["cells"] = nlohmann::json::array();
  for (const auto& c : mesh.cells) j["cells"].push_back({c[0], c[1], c[2]});
  return j.dump();
}

ApertureMesh mesh_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ApertureMesh mesh;
  for (const auto& v : j.at("vertices"))
    mesh.vertices.push_back(Vec2(v.at(0).get<double>(), v.at(1).get<double>()));
  for (const auto& c : j.at("cells"))
    mesh.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
  mesh.finalize();
  return mesh;
}

}  // namespace aperture::geo
