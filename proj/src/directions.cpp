#include "rayflow/directions.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rayflow {

GlobalDirectionSet make_global_directions(int L) {
  require(L >= 3, Err::TooFew, "need at least 3 global directions");
  GlobalDirectionSet set;
  set.angles.resize(L);
  for (int l = 0; l < L; ++l) set.angles[l] = kTwoPi * l / L;
  return set;
}

GlobalDirectionSet make_offset_directions(int L) {
  require(L >= 3, Err::TooFew, "need at least 3 global directions");
  GlobalDirectionSet set;
  set.angles.resize(L);
  for (int l = 0; l < L; ++l) set.angles[l] = (2.0 * l + 1.0) * kPi / L;
  return set;
}

GlobalDirectionSet make_custom_directions(std::vector<double> angles) {
  require(angles.size() >= 3, Err::TooFew, "need at least 3 global directions");
  for (std::size_t i = 0; i < angles.size(); ++i) {
    require(angles[i] >= 0.0 && angles[i] < kTwoPi, Err::OutOfRange,
            "custom angle outside [0, 2*pi)");
    if (i > 0)
      require(angles[i] > angles[i - 1], Err::OutOfRange,
              "custom angles must be strictly ascending");
  }
  return {std::move(angles)};
}

LocalDirectionMap local_directions(const SubDomain& cell, int edge,
                                   const GlobalDirectionSet& dirs) {
  require(edge >= 0 && edge < static_cast<int>(cell.edges.size()), Err::OutOfRange,
          "edge index outside the cell");
  const Edge& ed = cell.edges[edge];

  LocalDirectionMap map;
  map.cell = cell.id;
  map.edge = edge;
  map.gamma = ed.gamma;
  for (int l = 0; l < dirs.count(); ++l) {
    const double phi = wrap_pm_pi(ed.gamma - dirs.angles[l]);
    if (std::abs(phi) >= kPi / 2.0 - kGrazeGuard) continue;
    map.entries.push_back({phi, l, cell.eta * std::sin(phi)});
  }
  require(!map.entries.empty(), Err::EmptyLocalSet,
          "no inward direction at edge " + std::to_string(edge) + " of cell " +
              std::to_string(cell.id) + "; direction set too small");
  std::sort(map.entries.begin(), map.entries.end(),
            [](const LocalEntry& a, const LocalEntry& b) { return a.phi < b.phi; });
  map.breaks.resize(map.entries.size() - 1);
  for (std::size_t n = 0; n + 1 < map.entries.size(); ++n)
    map.breaks[n] = 0.5 * (map.entries[n].phi + map.entries[n + 1].phi);
  map.by_global.reserve(map.entries.size());
  for (std::size_t n = 0; n < map.entries.size(); ++n)
    map.by_global.emplace_back(map.entries[n].global, static_cast<int>(n));
  std::sort(map.by_global.begin(), map.by_global.end());
  return map;
}

int LocalDirectionMap::interval_index(double theta) const {
  require(std::abs(theta) < kPi / 2.0 - kGrazeGuard, Err::Grazing,
          "angle within the grazing guard of +-pi/2");
  // Intervals are left-open right-closed at interior boundaries, so a value
  // exactly on a break belongs to the bin on its left.
  const auto it = std::lower_bound(breaks.begin(), breaks.end(), theta);
  return static_cast<int>(it - breaks.begin());
}

int LocalDirectionMap::index_of_global(int l) const {
  const auto it = std::lower_bound(by_global.begin(), by_global.end(),
                                   std::make_pair(l, -1));
  if (it == by_global.end() || it->first != l) return -1;
  return it->second;
}

DirectionTables build_direction_tables(const MultiDomain& dom, GlobalDirectionSet dirs) {
  DirectionTables tab;
  tab.global = std::move(dirs);
  tab.maps.resize(dom.cells.size());
  for (const auto& cell : dom.cells) {
    auto& row = tab.maps[cell.id];
    row.reserve(cell.edges.size());
    for (std::size_t e = 0; e < cell.edges.size(); ++e)
      row.push_back(local_directions(cell, static_cast<int>(e), tab.global));
  }
  return tab;
}

CellFrame cell_frame(Vec3 normal) {
  const Vec3 n = normalized(normal);
  require(n.z > -1.0 + 1e-12, Err::NormalFlip,
          "normal opposes the reference axis; no unique rotation");
  CellFrame f;
  if (n.z >= 1.0 - 1e-12) {
    f.n = {0, 0, 1};
    return f;
  }
  // Minimal rotation taking z to n; its axis z x n lies in both the tangent
  // plane and the plane z = 0.
  const Vec3 axis = normalized(Vec3{-n.y, n.x, 0.0});
  const double c = n.z;  // cos of the rotation angle
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const auto rotate = [&](Vec3 p) {
    // Rodrigues with unit axis.
    const Vec3 kxp = cross(axis, p);
    const double kdp = dot(axis, p);
    return p * c + kxp * s + axis * (kdp * (1.0 - c));
  };
  f.u = rotate(Vec3{1, 0, 0});
  f.v = rotate(Vec3{0, 1, 0});
  f.n = n;
  return f;
}

double transmit_direction(const MultiDomain& dom, int cell_j, int edge_j,
                          double theta_arr) {
  const Edge& ed = dom.cells[cell_j].edges[edge_j];
  require(ed.neighbor.cell >= 0, Err::NotShared, "edge has no neighbor");
  const Edge& other = dom.cells[ed.neighbor.cell].edges[ed.neighbor.edge];
  return wrap_two_pi(other.gamma - theta_arr);
}

int ExecPolicy::team_size() const {
#ifdef _OPENMP
  if (threads <= 0) return omp_get_max_threads();
  return threads;
#else
  return 1;
#endif
}

}  // namespace rayflow
