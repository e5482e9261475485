// Convex polygonal sub-domains, arclength parametrization, boundary-element
// subdivision, and shared-edge topology for planar and shell multi-domains.
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "rayflow/common.hpp"

namespace rayflow {

struct EdgeNeighbor {
  int cell = -1;  // -1: free (physical) edge
  int edge = -1;
};

struct Edge {
  Vec2 a, b;        // endpoints in cell-local coordinates, a -> b along arclength
  double s0 = 0.0;  // arclength range [s0, s1) on the owning boundary
  double s1 = 0.0;
  double len = 0.0;
  Vec2 tangent;  // unit, a -> b
  Vec2 normal;   // unit inward (interior lies left of a -> b)
  double gamma = 0.0;  // angle of the inward normal in the cell frame
  EdgeNeighbor neighbor;
};

struct SubDomain {
  int id = 0;
  std::vector<Vec2> vertices;  // counterclockwise
  std::vector<Edge> edges;
  double eta = 1.0;  // slowness
  double mu = 0.0;   // damping coefficient
  double perimeter = 0.0;
  double diameter = 0.0;

  // 3D placement for shell cells; identity-plane placement for planar cells.
  bool embedded = false;
  Vec3 origin{};            // world position of the local (0,0)
  Vec3 axis_u{1, 0, 0};     // local +x in world coordinates
  Vec3 axis_v{0, 1, 0};     // local +y
  Vec3 axis_n{0, 0, 1};     // cell normal

  Vec3 to_world(Vec2 p) const {
    return origin + axis_u * p.x + axis_v * p.y;
  }
  Vec2 centroid() const;
  bool contains(Vec2 p, double tol = 0.0) const;
  // Distance from p to the boundary (positive inside).
  double boundary_distance(Vec2 p) const;
};

SubDomain build_polygon_domain(std::vector<Vec2> vertices, double eta, double mu);

// Point on the boundary at arclength s plus the owning edge (half-open rule:
// an arclength value at a vertex belongs to the edge starting there).
std::pair<Vec2, int> arclength_to_point(const SubDomain& dom, double s);
int edge_at_arclength(const SubDomain& dom, double s);

struct TriMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 3>> tris;
  // Extra physical-boundary edges (node index pairs); all unshared edges are
  // free regardless.
  std::vector<std::pair<int, int>> free_edges;
};

TriMesh load_mesh(const std::string& path);
void write_mesh(const TriMesh& mesh, const std::string& path);

struct MultiDomain {
  std::vector<SubDomain> cells;
  double diameter = 0.0;
  bool shell = false;
  // For shell domains: node indices per cell (same order as vertices), kept
  // for curvature neighborhoods. Empty for planar domains.
  std::vector<std::array<int, 3>> cell_nodes;
  int mesh_node_count = 0;

  int locate_cell(Vec2 p, double tol = 0.0) const;
};

// Planar multi-domain; adjacency found by matching edge endpoint pairs within
// tol (default 1e-9 x domain diameter). Neighboring cells traverse a common
// edge in opposite arclength directions.
MultiDomain build_multidomain(std::vector<SubDomain> cells, double tol = -1.0);

// Shell multi-domain from a triangle mesh. Triangles must be consistently
// oriented; each cell is laid out flat in its own frame (see cell_frame) with
// the centroid at the local origin.
MultiDomain build_shell_multidomain(const TriMesh& mesh, double eta, double mu);

struct BoundaryElement {
  int cell = 0;
  int edge = 0;
  int index_in_edge = 0;
  double s0 = 0.0;  // [s0, s1) on the owning boundary
  double s1 = 0.0;
  double len = 0.0;
};

struct Discretization {
  // Elements per cell in arclength order.
  std::vector<std::vector<BoundaryElement>> elems;
  // Per cell: first element index and element count of each edge.
  std::vector<std::vector<int>> edge_first;
  std::vector<std::vector<int>> edge_count;

  int element_at(int cell, double s) const;
  std::size_t total_elements() const;
};

// Each edge of length l is split into max(1, round(l / target_h)) equal
// elements; shared edges receive identical grids on both sides.
std::vector<BoundaryElement> subdivide_boundary(const SubDomain& dom, double target_h);
Discretization build_discretization(const MultiDomain& dom, double target_h);
// Validating constructor from per-cell element lists (grids of shared edges
// must coincide pairwise).
Discretization make_discretization(const MultiDomain& dom,
                                   std::vector<std::vector<BoundaryElement>> elems);

}  // namespace rayflow
