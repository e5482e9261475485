// Global direction sets, per-edge local inward subsets with their test
// intervals, and the cell frames used on non-planar meshes.
#pragma once

#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/geometry.hpp"

namespace rayflow {

struct GlobalDirectionSet {
  std::vector<double> angles;  // strictly ascending in [0, 2*pi)
  int count() const { return static_cast<int>(angles.size()); }
};

// Equally spaced set 2*pi*(l-1)/L, l = 1..L.
GlobalDirectionSet make_global_directions(int L);
// Offset variant (2l-1)*pi/L used for worst-case direction studies.
GlobalDirectionSet make_offset_directions(int L);
GlobalDirectionSet make_custom_directions(std::vector<double> angles);

struct LocalEntry {
  double phi = 0.0;  // local angle in (-pi/2, pi/2), vs the inward normal
  int global = 0;    // index into the global set
  double p = 0.0;    // tangential momentum eta * sin(phi)
};

// Inward subset of the global directions at one edge, sorted ascending by
// phi, plus the partition of (-pi/2, pi/2) biorthogonal to the delta nodes:
// I_1 = (-pi/2, b_1], I_n = (b_{n-1}, b_n], I_N = (b_{N-1}, pi/2) with
// b_n = (phi_n + phi_{n+1}) / 2.
struct LocalDirectionMap {
  int cell = 0;
  int edge = 0;
  double gamma = 0.0;
  std::vector<LocalEntry> entries;
  std::vector<double> breaks;  // size entries.size() - 1
  // Lookup of (global index, local index) sorted by global index.
  std::vector<std::pair<int, int>> by_global;

  int size() const { return static_cast<int>(entries.size()); }
  // Unique n with theta in I_n; throws Grazing for |theta| >= pi/2 - guard.
  int interval_index(double theta) const;
  // Local index of a global direction, or -1 if it is not in the inward set.
  int index_of_global(int l) const;
};

LocalDirectionMap local_directions(const SubDomain& cell, int edge,
                                   const GlobalDirectionSet& dirs);

struct DirectionTables {
  GlobalDirectionSet global;
  std::vector<std::vector<LocalDirectionMap>> maps;  // [cell][edge]

  const LocalDirectionMap& at(int cell, int edge) const { return maps[cell][edge]; }
};

DirectionTables build_direction_tables(const MultiDomain& dom, GlobalDirectionSet dirs);

// Proper rotation taking the world axes to a cell frame: rotated z = the cell
// normal, rotation axis = intersection of the tangent plane with z = 0,
// rotated x = the in-plane first axis. Identity when the normal is z; rejects
// normals within 1e-12 of -z (no unique axis).
struct CellFrame {
  Vec3 u{1, 0, 0};
  Vec3 v{0, 1, 0};
  Vec3 n{0, 0, 1};
};

CellFrame cell_frame(Vec3 normal);

// Local arrival angle of a ray with direction dir at an edge with inward
// normal nrm: atan2-form of gamma - angle(dir), no wrapping pitfalls.
inline double local_angle_of_direction(Vec2 dir, Vec2 nrm) {
  return std::atan2(cross(dir, nrm), dot(dir, nrm));
}

// Direction vector of a ray leaving at local angle theta from an edge with
// inward normal nrm (global angle gamma - theta).
inline Vec2 direction_from_local(double theta, Vec2 nrm) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {nrm.x * c + nrm.y * s, -nrm.x * s + nrm.y * c};
}

// Direction angle, in the receiving cell's frame, of a ray crossing the
// shared edge `edge_j` of cell j with arrival angle theta_arr. Unfolding the
// source plane onto the neighbor's about the shared 3D edge preserves the
// in-plane angle with that edge, so the transmitted local angle equals the
// arrival angle; only the frame-relative direction changes.
double transmit_direction(const MultiDomain& dom, int cell_j, int edge_j,
                          double theta_arr);

}  // namespace rayflow
