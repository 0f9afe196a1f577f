#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aperture/types.hpp"

namespace aperture::geo {

struct Disc {
  double radius = 1.0;
};

struct Rectangle {
  double half_width_x = 1.0;
  double half_width_y = 1.0;
};

struct Polygon {
  std::vector<Vec2> vertices;  // simple, positively oriented after validation
};

struct ApertureSpec {
  std::variant<Disc, Rectangle, Polygon> shape;

  double analytic_area() const;
  double diameter() const;
  void validate() const;  // throws std::invalid_argument on degenerate input
};

struct MeshOptions {
  // Geometric refinement toward the aperture boundary: `grading_levels`
  // rings of width h*q, h*q^2, ..., h*q^levels (q = grading_ratio).
  double grading_ratio = 0.7;
  int grading_levels = 0;
  // Quality floor asserted after construction. Graded meshes are
  // intentionally anisotropic near the rim; callers relax this accordingly.
  double min_angle_deg = 1e-3;
};

class ApertureMesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;  // counterclockwise

  // Edge table. Edges are stored (tail, head) with tail < head; the global
  // edge normal is the head-tail direction rotated by -90 degrees.
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> cell_edges;      // local edge i is opposite vertex i
  std::vector<std::array<int, 3>> cell_edge_sign;  // +1 when global normal is outward
  std::vector<int> edge_cells;                     // cells touching each edge (1 or 2)
  std::vector<bool> vertex_on_boundary;

  double h = 0.0;  // mesh parameter: longest edge

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  Vec2 vertex_of(int cell, int local) const {
    return vertices[cells[cell][local]];
  }
  double cell_area(int cell) const;
  Vec2 cell_centroid(int cell) const;
  double cell_diameter(int cell) const;
  double edge_length(int e) const;
  double total_area() const;
  double min_angle_deg() const;
  double diameter() const;

  // Rebuilds edges/incidence from vertices+cells and checks orientation and
  // manifoldness. Throws std::runtime_error on a broken mesh.
  void finalize();
};

struct DofTable {
  // Vector (div-conforming) unknowns live on interior edges only, so the
  // zero-extension of any discrete field has no divergence line source
  // on the aperture boundary.
  std::vector<int> edge_dof;  // -1 for boundary edges
  std::vector<int> dof_edge;
  int n_vector = 0;

  // Scalar unknowns: one per cell (piecewise constants).
  int n_scalar = 0;

  // Saddle multiplier unknowns: interior vertices (continuous P1, zero on
  // the boundary).
  std::vector<int> vertex_dof;  // -1 for boundary vertices
  std::vector<int> dof_vertex;
  int n_multiplier = 0;
};

ApertureMesh build_mesh(const ApertureSpec& spec, double h,
                        const MeshOptions& options = {});

DofTable build_dofs(const ApertureMesh& mesh);

// Mesh exchange format: {"vertices": [[x,y],...], "cells": [[i,j,k],...]}.
std::string mesh_to_json(const ApertureMesh& mesh);
ApertureMesh mesh_from_json(const std::string& text);

}  // namespace aperture::geo
