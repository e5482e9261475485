#include "rayflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>
#include <unordered_map>

#include "rayflow/directions.hpp"

namespace rayflow {

const char* err_name(Err code) {
  switch (code) {
    case Err::NonConvex: return "NonConvex";
    case Err::DegenerateEdge: return "DegenerateEdge";
    case Err::ClockwiseOrder: return "ClockwiseOrder";
    case Err::NonConformingEdge: return "NonConformingEdge";
    case Err::OrphanOverlap: return "OrphanOverlap";
    case Err::OutOfRange: return "OutOfRange";
    case Err::TooFew: return "TooFew";
    case Err::EmptyLocalSet: return "EmptyLocalSet";
    case Err::Grazing: return "Grazing";
    case Err::NormalFlip: return "NormalFlip";
    case Err::NotShared: return "NotShared";
    case Err::NoHit: return "NoHit";
    case Err::NegativeLength: return "NegativeLength";
    case Err::NotConverged: return "NotConverged";
    case Err::SingularSystem: return "SingularSystem";
    case Err::NoMatchingEdge: return "NoMatchingEdge";
    case Err::SourceOnBoundary: return "SourceOnBoundary";
    case Err::SourceNotVertex: return "SourceNotVertex";
    case Err::VertexHit: return "VertexHit";
    case Err::NotInCell: return "NotInCell";
    case Err::AtSource: return "AtSource";
    case Err::InsufficientNeighbors: return "InsufficientNeighbors";
    case Err::RankDeficientFit: return "RankDeficientFit";
    case Err::InvalidWavenumbers: return "InvalidWavenumbers";
    case Err::MissingThreshold: return "MissingThreshold";
    case Err::ZeroDamping: return "ZeroDamping";
    case Err::NonConvexDomain: return "NonConvexDomain";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::DegenerateDenominator: return "DegenerateDenominator";
    case Err::NonPositiveError: return "NonPositiveError";
    case Err::ConfigError: return "ConfigError";
    case Err::NoOracle: return "NoOracle";
    case Err::IoError: return "IoError";
  }
  return "Unknown";
}

Vec2 SubDomain::centroid() const {
  // Area-weighted polygon centroid.
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = vertices[i], q = vertices[(i + 1) % n];
    const double w = cross(p, q);
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

bool SubDomain::contains(Vec2 p, double tol) const {
  for (const Edge& e : edges) {
    if (dot(p - e.a, e.normal) < tol) return false;
  }
  return true;
}

double SubDomain::boundary_distance(Vec2 p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const Edge& e : edges) {
    const double u = std::clamp(dot(p - e.a, e.tangent), 0.0, e.len);
    d = std::min(d, (p - (e.a + e.tangent * u)).norm());
  }
  return d;
}

namespace {

double polygon_diameter(const std::vector<Vec2>& v) {
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
  return d;
}

void finalize_edges(SubDomain& dom) {
  const std::size_t n = dom.vertices.size();
  dom.edges.resize(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Edge& e = dom.edges[i];
    e.a = dom.vertices[i];
    e.b = dom.vertices[(i + 1) % n];
    e.len = (e.b - e.a).norm();
    e.s0 = s;
    s += e.len;
    e.s1 = s;
    e.tangent = normalized(e.b - e.a);
    e.normal = rot90(e.tangent);
    e.gamma = std::atan2(e.normal.y, e.normal.x);
  }
  dom.perimeter = s;
  dom.diameter = polygon_diameter(dom.vertices);
}

}  // namespace

SubDomain build_polygon_domain(std::vector<Vec2> vertices, double eta, double mu) {
  require(vertices.size() >= 3, Err::NonConvex, "need at least 3 vertices");
  require(eta > 0.0, Err::OutOfRange, "eta must be positive");
  require(mu >= 0.0, Err::OutOfRange, "mu must be nonnegative");

  const double diam = polygon_diameter(vertices);
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double len = (vertices[(i + 1) % n] - vertices[i]).norm();
    require(len > 1e-12 * diam, Err::DegenerateEdge,
            "edge " + std::to_string(i) + " shorter than 1e-12 of the diameter");
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    area2 += cross(vertices[i], vertices[(i + 1) % n]);
  require(area2 != 0.0, Err::NonConvex, "zero-area polygon");
  require(area2 > 0.0, Err::ClockwiseOrder, "vertices must be counterclockwise");
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 u = vertices[(i + 1) % n] - vertices[i];
    const Vec2 v = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    require(cross(u, v) > 0.0, Err::NonConvex,
            "collinear or reflex turn at vertex " + std::to_string((i + 1) % n));
  }

  SubDomain dom;
  dom.vertices = std::move(vertices);
  dom.eta = eta;
  dom.mu = mu;
  finalize_edges(dom);
  return dom;
}

int edge_at_arclength(const SubDomain& dom, double s) {
  require(s >= 0.0 && s < dom.perimeter, Err::OutOfRange,
          "arclength " + std::to_string(s) + " outside [0, perimeter)");
  // Half-open intervals [s0, s1): a vertex value belongs to the edge starting
  // there.
  int lo = 0, hi = static_cast<int>(dom.edges.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (s < dom.edges[mid].s1)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::pair<Vec2, int> arclength_to_point(const SubDomain& dom, double s) {
  const int e = edge_at_arclength(dom, s);
  const Edge& ed = dom.edges[e];
  return {ed.a + ed.tangent * (s - ed.s0), e};
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Err::IoError, "cannot open mesh file " + path);
  TriMesh mesh;
  std::string tok;
  require(static_cast<bool>(in >> tok) && tok == "nodes", Err::IoError,
          path + ": expected 'nodes N'");
  std::size_t n = 0;
  in >> n;
  mesh.nodes.resize(n);
  for (auto& p : mesh.nodes) in >> p.x >> p.y >> p.z;
  require(static_cast<bool>(in >> tok) && tok == "tris", Err::IoError,
          path + ": expected 'tris T'");
  std::size_t t = 0;
  in >> t;
  mesh.tris.resize(t);
  for (auto& tri : mesh.tris) in >> tri[0] >> tri[1] >> tri[2];
  require(in.good(), Err::IoError, path + ": truncated mesh file");
  if (in >> tok) {
    require(tok == "free_edges", Err::IoError, path + ": unexpected token " + tok);
    std::size_t f = 0;
    in >> f;
    mesh.free_edges.resize(f);
    for (auto& e : mesh.free_edges) in >> e.first >> e.second;
  }
  for (const auto& tri : mesh.tris)
    for (int k : tri)
      require(k >= 0 && static_cast<std::size_t>(k) < mesh.nodes.size(), Err::IoError,
              path + ": triangle node index out of range");
  return mesh;
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Err::IoError, "cannot write mesh file " + path);
  out.precision(17);
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& p : mesh.nodes) out << p.x << " " << p.y << " " << p.z << "\n";
  out << "tris " << mesh.tris.size() << "\n";
  for (const auto& t : mesh.tris) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  if (!mesh.free_edges.empty()) {
    out << "free_edges " << mesh.free_edges.size() << "\n";
    for (const auto& e : mesh.free_edges) out << e.first << " " << e.second << "\n";
  }
}

int MultiDomain::locate_cell(Vec2 p, double tol) const {
  for (const SubDomain& c : cells)
    if (c.contains(p, tol)) return c.id;
  return -1;
}

namespace {

// Cluster points within tol and return one id per input point.
std::vector<int> snap_points(const std::vector<Vec2>& pts, double tol) {
  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::tie(pts[a].x, pts[a].y) < std::tie(pts[b].x, pts[b].y);
  });
  std::vector<int> id(pts.size(), -1);
  int next = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int i = order[k];
    if (id[i] >= 0) continue;
    id[i] = next;
    for (std::size_t j = k + 1; j < order.size(); ++j) {
      const int m = order[j];
      if (pts[m].x - pts[i].x > tol) break;
      if (id[m] < 0 && std::abs(pts[m].y - pts[i].y) <= tol) id[m] = next;
    }
    ++next;
  }
  return id;
}

double domain_diameter(const std::vector<SubDomain>& cells) {
  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  for (const auto& c : cells)
    for (const auto& v : c.vertices) {
      lo_x = std::min(lo_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_x = std::max(hi_x, v.x);
      hi_y = std::max(hi_y, v.y);
    }
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

}  // namespace

MultiDomain build_multidomain(std::vector<SubDomain> cells, double tol) {
  MultiDomain dom;
  dom.diameter = domain_diameter(cells);
  if (tol <= 0.0) tol = 1e-9 * std::max(dom.diameter, 1e-300);
  dom.cells = std::move(cells);
  for (std::size_t i = 0; i < dom.cells.size(); ++i) dom.cells[i].id = static_cast<int>(i);

  std::vector<Vec2> verts;
  std::vector<std::pair<int, int>> vert_of;  // (cell, vertex)
  for (const auto& cell : dom.cells)
    for (std::size_t v = 0; v < cell.vertices.size(); ++v) {
      verts.push_back(cell.vertices[v]);
      vert_of.emplace_back(cell.id, static_cast<int>(v));
    }
  const std::vector<int> pid = snap_points(verts, tol);
  std::vector<std::vector<int>> cell_pid(dom.cells.size());
  {
    std::size_t k = 0;
    for (const auto& cell : dom.cells) {
      cell_pid[cell.id].resize(cell.vertices.size());
      for (std::size_t v = 0; v < cell.vertices.size(); ++v) cell_pid[cell.id][v] = pid[k++];
    }
  }

  const auto pack = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };
  std::unordered_map<std::uint64_t, std::pair<int, int>> seen;
  for (auto& cell : dom.cells) {
    const std::size_t nv = cell.vertices.size();
    for (std::size_t e = 0; e < nv; ++e) {
      Edge& ed = cell.edges[e];
      const std::uint64_t key =
          pack(cell_pid[cell.id][e], cell_pid[cell.id][(e + 1) % nv]);
      auto [it, inserted] = seen.try_emplace(key, cell.id, static_cast<int>(e));
      if (!inserted) {
        auto [oc, oe] = it->second;
        require(oc != cell.id, Err::OrphanOverlap,
                "cell " + std::to_string(cell.id) + " repeats an edge");
        Edge& other = dom.cells[oc].edges[oe];
        require(other.neighbor.cell < 0, Err::OrphanOverlap,
                "edge shared by more than two cells");
        require(std::abs(other.len - ed.len) <= 2.0 * tol, Err::NonConformingEdge,
                "shared edge lengths differ");
        ed.neighbor = {oc, oe};
        other.neighbor = {cell.id, static_cast<int>(e)};
      }
    }
  }

  // Collinear partial overlaps (ends do not match) are mesh defects; detect
  // the common case of an edge midpoint sitting strictly inside another
  // cell's edge.
  for (const auto& cell : dom.cells) {
    for (const Edge& ed : cell.edges) {
      if (ed.neighbor.cell >= 0) continue;
      const Vec2 mid = (ed.a + ed.b) * 0.5;
      for (const auto& other : dom.cells) {
        if (other.id == cell.id) continue;
        for (const Edge& oe : other.edges) {
          if (oe.neighbor.cell >= 0) continue;
          const double off = std::abs(cross(mid - oe.a, oe.tangent));
          const double u = dot(mid - oe.a, oe.tangent);
          if (off < tol && u > tol && u < oe.len - tol)
            fail(Err::NonConformingEdge,
                 "edges of cells " + std::to_string(cell.id) + " and " +
                     std::to_string(other.id) + " overlap without matching endpoints");
        }
      }
    }
  }
  return dom;
}

MultiDomain build_shell_multidomain(const TriMesh& mesh, double eta, double mu) {
  MultiDomain dom;
  dom.shell = true;
  dom.mesh_node_count = static_cast<int>(mesh.nodes.size());
  dom.cells.reserve(mesh.tris.size());
  dom.cell_nodes = mesh.tris;

  double lo = 1e300, hi = -1e300;
  for (const auto& p : mesh.nodes) {
    lo = std::min({lo, p.x, p.y, p.z});
    hi = std::max({hi, p.x, p.y, p.z});
  }
  dom.diameter = std::sqrt(3.0) * (hi - lo);

  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const auto& tri = mesh.tris[t];
    const Vec3 A = mesh.nodes[tri[0]], B = mesh.nodes[tri[1]], C = mesh.nodes[tri[2]];
    const Vec3 nrm = normalized(cross(B - A, C - A));
    const CellFrame f = cell_frame(nrm);
    const Vec3 O = (A + B + C) * (1.0 / 3.0);

    SubDomain cell;
    cell.id = static_cast<int>(t);
    cell.eta = eta;
    cell.mu = mu;
    cell.embedded = true;
    cell.origin = O;
    cell.axis_u = f.u;
    cell.axis_v = f.v;
    cell.axis_n = f.n;
    for (const Vec3& P : {A, B, C})
      cell.vertices.push_back({dot(P - O, f.u), dot(P - O, f.v)});
    double area2 = 0.0;
    for (int i = 0; i < 3; ++i) area2 += cross(cell.vertices[i], cell.vertices[(i + 1) % 3]);
    require(area2 > 0.0, Err::ClockwiseOrder,
            "triangle " + std::to_string(t) + " is degenerate or mis-oriented");
    finalize_edges(cell);
    dom.cells.push_back(std::move(cell));
  }

  // Topological adjacency through shared node pairs.
  const auto pack = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };
  std::unordered_map<std::uint64_t, std::pair<int, int>> seen;
  std::unordered_map<std::uint64_t, bool> forced_free;
  for (const auto& fe : mesh.free_edges) forced_free[pack(fe.first, fe.second)] = true;

  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const auto& tri = mesh.tris[t];
    for (int e = 0; e < 3; ++e) {
      const std::uint64_t key = pack(tri[e], tri[(e + 1) % 3]);
      if (forced_free.count(key)) continue;
      auto [it, inserted] = seen.try_emplace(key, static_cast<int>(t), e);
      if (!inserted) {
        auto [oc, oe] = it->second;
        require(oc != static_cast<int>(t), Err::OrphanOverlap, "triangle repeats an edge");
        Edge& a = dom.cells[t].edges[e];
        Edge& b = dom.cells[oc].edges[oe];
        require(b.neighbor.cell < 0, Err::OrphanOverlap, "edge shared by three cells");
        a.neighbor = {oc, oe};
        b.neighbor = {static_cast<int>(t), e};
      }
    }
  }
  return dom;
}

std::vector<BoundaryElement> subdivide_boundary(const SubDomain& dom, double target_h) {
  require(target_h > 0.0, Err::OutOfRange, "target_h must be positive");
  std::vector<BoundaryElement> out;
  for (std::size_t e = 0; e < dom.edges.size(); ++e) {
    const Edge& ed = dom.edges[e];
    const int m = std::max(1, static_cast<int>(std::llround(ed.len / target_h)));
    const double step = ed.len / m;
    for (int k = 0; k < m; ++k) {
      BoundaryElement be;
      be.cell = dom.id;
      be.edge = static_cast<int>(e);
      be.index_in_edge = k;
      be.s0 = ed.s0 + k * step;
      be.s1 = (k + 1 == m) ? ed.s1 : ed.s0 + (k + 1) * step;
      be.len = be.s1 - be.s0;
      out.push_back(be);
    }
  }
  return out;
}

Discretization make_discretization(const MultiDomain& dom,
                                   std::vector<std::vector<BoundaryElement>> elems) {
  Discretization disc;
  disc.elems = std::move(elems);
  disc.edge_first.resize(dom.cells.size());
  disc.edge_count.resize(dom.cells.size());
  for (std::size_t c = 0; c < dom.cells.size(); ++c) {
    const std::size_t ne = dom.cells[c].edges.size();
    disc.edge_first[c].assign(ne, -1);
    disc.edge_count[c].assign(ne, 0);
    for (std::size_t i = 0; i < disc.elems[c].size(); ++i) {
      const BoundaryElement& be = disc.elems[c][i];
      if (disc.edge_first[c][be.edge] < 0) disc.edge_first[c][be.edge] = static_cast<int>(i);
      ++disc.edge_count[c][be.edge];
    }
  }
  for (const auto& cell : dom.cells) {
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      const EdgeNeighbor nb = cell.edges[e].neighbor;
      if (nb.cell < 0 || nb.cell < cell.id) continue;
      require(disc.edge_count[cell.id][e] == disc.edge_count[nb.cell][nb.edge],
              Err::NonConformingEdge,
              "element grids differ on the edge shared by cells " +
                  std::to_string(cell.id) + " and " + std::to_string(nb.cell));
    }
  }
  return disc;
}

Discretization build_discretization(const MultiDomain& dom, double target_h) {
  std::vector<std::vector<BoundaryElement>> elems;
  elems.reserve(dom.cells.size());
  for (const auto& cell : dom.cells) elems.push_back(subdivide_boundary(cell, target_h));
  return make_discretization(dom, std::move(elems));
}

int Discretization::element_at(int cell, double s) const {
  const auto& list = elems[cell];
  require(!list.empty(), Err::OutOfRange, "cell has no elements");
  require(s >= 0.0 && s < list.back().s1, Err::OutOfRange,
          "arclength " + std::to_string(s) + " outside [0, " +
              std::to_string(list.back().s1) + ") of cell " + std::to_string(cell));
  int lo = 0, hi = static_cast<int>(list.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (s < list[mid].s1)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::size_t Discretization::total_elements() const {
  std::size_t n = 0;
  for (const auto& v : elems) n += v.size();
  return n;
}

}  // namespace rayflow
