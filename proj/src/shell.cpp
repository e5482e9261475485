#include "rayflow/shell.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

namespace rayflow {

namespace {

// Vertex-to-vertex adjacency over mesh edges.
std::vector<std::vector<int>> vertex_adjacency(const MultiDomain& dom) {
  std::vector<std::set<int>> adj(dom.mesh_node_count);
  for (const auto& tri : dom.cell_nodes)
    for (int e = 0; e < 3; ++e) {
      adj[tri[e]].insert(tri[(e + 1) % 3]);
      adj[tri[(e + 1) % 3]].insert(tri[e]);
    }
  std::vector<std::vector<int>> out(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) out[i] = {adj[i].begin(), adj[i].end()};
  return out;
}

}  // namespace

CurvatureData estimate_curvature(const MultiDomain& dom, int neighborhood_rings) {
  require(dom.shell && !dom.cell_nodes.empty(), Err::OutOfRange,
          "curvature estimation needs a shell multi-domain");
  require(neighborhood_rings >= 1, Err::OutOfRange, "need at least one vertex ring");

  // World node positions recovered from any owning cell.
  std::vector<Vec3> nodes(dom.mesh_node_count);
  std::vector<char> have(dom.mesh_node_count, 0);
  for (const auto& cell : dom.cells)
    for (int v = 0; v < 3; ++v) {
      const int id = dom.cell_nodes[cell.id][v];
      if (!have[id]) {
        nodes[id] = cell.to_world(cell.vertices[v]);
        have[id] = 1;
      }
    }
  const auto adj = vertex_adjacency(dom);

  CurvatureData data;
  data.flat_tol = 1e-3 / std::max(dom.diameter, 1e-300);
  data.cells.resize(dom.cells.size());

  for (const auto& cell : dom.cells) {
    std::set<int> hood(dom.cell_nodes[cell.id].begin(), dom.cell_nodes[cell.id].end());
    std::set<int> frontier = hood;
    for (int r = 0; r < neighborhood_rings; ++r) {
      std::set<int> next;
      for (int v : frontier)
        for (int w : adj[v])
          if (hood.insert(w).second) next.insert(w);
      frontier = std::move(next);
    }
    require(hood.size() >= 5, Err::InsufficientNeighbors,
            "cell " + std::to_string(cell.id) + " has fewer than 5 neighborhood vertices");

    // z = a x^2 + b xy + c y^2 in the cell frame, origin at the centroid.
    const Vec3 O = cell.origin + cell.axis_u * cell.centroid().x +
                   cell.axis_v * cell.centroid().y;
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (int v : hood) {
      const Vec3 d = nodes[v] - O;
      const double x = dot(d, cell.axis_u);
      const double y = dot(d, cell.axis_v);
      const double z = dot(d, cell.axis_n);
      const Eigen::Vector3d row(x * x, x * y, y * y);
      ata += row * row.transpose();
      atb += row * z;
    }
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
    require(lu.isInvertible(), Err::RankDeficientFit,
            "quadric fit rank-deficient at cell " + std::to_string(cell.id));
    const Eigen::Vector3d abc = lu.solve(atb);

    Eigen::Matrix2d shape;
    shape << 2.0 * abc[0], abc[1], abc[1], 2.0 * abc[2];
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape);
    double k_small = eig.eigenvalues()[0], k_big = eig.eigenvalues()[1];
    Eigen::Vector2d d_small = eig.eigenvectors().col(0), d_big = eig.eigenvectors().col(1);
    if (std::abs(k_small) > std::abs(k_big)) {
      std::swap(k_small, k_big);
      std::swap(d_small, d_big);
    }
    // Normal-orientation ambiguity: pick the sign that makes the dominant
    // curvature positive.
    if (k_big < 0.0) {
      k_big = -k_big;
      k_small = -k_small;
    }

    CellCurvature& cc = data.cells[cell.id];
    cc.k1 = k_big;
    cc.k2 = k_small;
    cc.e1 = normalized(cell.axis_u * d_big[0] + cell.axis_v * d_big[1]);
    cc.e2 = normalized(cell.axis_u * d_small[0] + cell.axis_v * d_small[1]);
    cc.flat = std::abs(cc.k1) < data.flat_tol;
  }
  return data;
}

double threshold_angle(double k, double ky_max) {
  require(k > 0.0 && ky_max > 0.0 && ky_max <= k, Err::InvalidWavenumbers,
          "need 0 < ky_max <= k");
  if (ky_max >= k) return kPi / 2.0;
  return std::atan(ky_max / std::sqrt(k * k - ky_max * ky_max));
}

ThresholdTable build_threshold_table(const MultiDomain& dom, const CurvatureData& curv,
                                     double k, double ky_max) {
  const double ts = threshold_angle(k, ky_max);
  ThresholdTable table = build_threshold_table_fixed(dom, curv, ts);
  table.provenance.kind = ThresholdProvenance::Computed;
  return table;
}

ThresholdTable build_threshold_table_fixed(const MultiDomain& dom,
                                           const CurvatureData& curv,
                                           double theta_star) {
  require(theta_star > 0.0 && theta_star <= kPi / 2.0, Err::InvalidWavenumbers,
          "threshold angle must be in (0, pi/2]");
  ThresholdTable table;
  table.provenance.kind = ThresholdProvenance::UserSupplied;
  table.theta_star.resize(dom.cells.size());
  for (const auto& cell : dom.cells) {
    auto& row = table.theta_star[cell.id];
    row.assign(cell.edges.size(), kPi / 2.0);
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      const EdgeNeighbor nb = cell.edges[e].neighbor;
      if (nb.cell < 0) continue;
      if (!curv.cells[nb.cell].flat) row[e] = theta_star;
    }
  }
  return table;
}

InterfaceRule::RT CurvatureRule::weights(const MultiDomain& dom, int cell, int edge,
                                         double global_angle, double /*theta_arr*/) const {
  const Edge& ed = dom.cells[cell].edges[edge];
  if (ed.neighbor.cell < 0) return {free_reflect_, 0.0};
  const int recv = ed.neighbor.cell;
  if (curv_.cells[recv].flat) return {0.0, 1.0};
  require(cell < static_cast<int>(thresholds_.theta_star.size()) &&
              edge < static_cast<int>(thresholds_.theta_star[cell].size()),
          Err::MissingThreshold, "no threshold entry for this edge");
  const double ts = thresholds_.theta_star[cell][edge];

  const SubDomain& c = dom.cells[cell];
  const Vec3 dir3 = c.axis_u * std::cos(global_angle) + c.axis_v * std::sin(global_angle);
  const Vec3 e1 = curv_.cells[recv].e1;
  const double psi = std::acos(std::min(1.0, std::abs(dot(dir3, e1))));
  if (psi < ts) return {0.0, 1.0};

  // Specular reflection at the interface edge, within the incoming cell's
  // plane; its angle to the receiver's principal direction decides between
  // reflection and transmission through this local interface.
  const Vec3 edge3 = normalized(c.to_world(ed.b) - c.to_world(ed.a));
  const Vec3 refl = edge3 * (2.0 * dot(dir3, edge3)) - dir3;
  const double psi_r = std::acos(std::min(1.0, std::abs(dot(refl, e1))));
  if (psi_r < ts) return {0.0, 1.0};
  return {1.0, 0.0};
}

}  // namespace rayflow
