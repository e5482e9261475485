#include <doctest.h>

#include <cmath>
#include <random>

#include "rayflow/geometry.hpp"
#include "rayflow/meshgen.hpp"

using namespace rayflow;

namespace {

SubDomain unit_square(double eta = 1.0, double mu = kPi / 2.0) {
  return build_polygon_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, eta, mu);
}

}  // namespace

TEST_CASE("unit square parametrization") {
  const SubDomain sq = unit_square();
  CHECK(sq.perimeter == doctest::Approx(4.0));
  // Fourth edge runs from (0,1) to (0,0) over arclength [3, 4).
  const Edge& e4 = sq.edges[3];
  CHECK(e4.s0 == doctest::Approx(3.0));
  CHECK(e4.s1 == doctest::Approx(4.0));
  CHECK(e4.a.x == doctest::Approx(0.0));
  CHECK(e4.a.y == doctest::Approx(1.0));
  CHECK(e4.b.y == doctest::Approx(0.0));
  // Inward normals point into the square.
  for (const Edge& e : sq.edges) {
    const Vec2 mid = (e.a + e.b) * 0.5;
    CHECK(sq.contains(mid + e.normal * 0.1));
  }
  CHECK(sq.edges[0].gamma == doctest::Approx(kPi / 2.0));
  CHECK(sq.edges[3].gamma == doctest::Approx(0.0));
}

TEST_CASE("triangle perimeter") {
  const SubDomain tri = build_polygon_domain({{0, 0}, {1, 0}, {0, 1}}, 1.0, 0.0);
  CHECK(tri.perimeter == doctest::Approx(2.0 + std::sqrt(2.0)));
}

TEST_CASE("degenerate polygons are rejected") {
  CHECK_THROWS_WITH_AS(build_polygon_domain({{0, 0}, {1, 0}, {2, 0}}, 1.0, 0.0),
                       doctest::Contains("NonConvex"), Error);
  // clockwise
  CHECK_THROWS_AS(build_polygon_domain({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, 1.0, 0.0), Error);
  // repeated vertex
  CHECK_THROWS_AS(build_polygon_domain({{0, 0}, {1, 0}, {1, 0}, {0, 1}}, 1.0, 0.0), Error);
  // reflex quad
  CHECK_THROWS_AS(
      build_polygon_domain({{0, 0}, {1, 0}, {0.1, 0.1}, {0, 1}}, 1.0, 0.0), Error);
  CHECK_THROWS_AS(build_polygon_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, -1.0, 0.0), Error);
  CHECK_THROWS_AS(build_polygon_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 1.0, -0.5), Error);
}

TEST_CASE("subdivision counts and tiling") {
  const SubDomain sq = unit_square();
  SUBCASE("target 0.0125 gives 80 elements per unit edge") {
    const auto elems = subdivide_boundary(sq, 0.0125);
    CHECK(elems.size() == 4 * 80);
    for (const auto& be : elems) CHECK(be.len == doctest::Approx(0.0125));
  }
  SUBCASE("coarse target is floor-guarded to one element") {
    const auto elems = subdivide_boundary(sq, 2.0);
    CHECK(elems.size() == 4);
    for (const auto& be : elems) CHECK(be.len == doctest::Approx(1.0));
  }
  SUBCASE("0.3-long edge rounds to 24 elements that tile exactly") {
    const SubDomain tri = build_polygon_domain({{0, 0}, {0.3, 0}, {0, 0.2}}, 1.0, 0.0);
    const auto elems = subdivide_boundary(tri, 0.0125);
    int on_first = 0;
    double len_sum = 0.0;
    for (const auto& be : elems) {
      if (be.edge == 0) {
        ++on_first;
        len_sum += be.len;
      }
    }
    CHECK(on_first == 24);
    CHECK(len_sum == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("tiling covers the whole boundary without gaps") {
    const auto elems = subdivide_boundary(sq, 0.37);
    double s = 0.0;
    for (const auto& be : elems) {
      CHECK(be.s0 == doctest::Approx(s).epsilon(1e-12));
      s = be.s1;
    }
    CHECK(s == doctest::Approx(sq.perimeter).epsilon(1e-12));
  }
}

TEST_CASE("multidomain adjacency") {
  SUBCASE("split square shares one edge") {
    auto left = build_polygon_domain({{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}}, 1, 0.1);
    auto right = build_polygon_domain({{0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}}, 1, 0.1);
    const MultiDomain dom = build_multidomain({left, right});
    int shared = 0;
    for (const auto& cell : dom.cells)
      for (const Edge& e : cell.edges)
        if (e.neighbor.cell >= 0) ++shared;
    CHECK(shared == 2);  // one edge, two sides
    const Edge& e1 = dom.cells[0].edges[1];
    CHECK(e1.neighbor.cell == 1);
    CHECK(dom.cells[1].edges[e1.neighbor.edge].neighbor.cell == 0);
  }
  SUBCASE("10x10 grid has 180 interior edges") {
    const MultiDomain dom = unit_square_grid(10, 1.0, 0.1);
    int shared_sides = 0;
    for (const auto& cell : dom.cells)
      for (const Edge& e : cell.edges)
        if (e.neighbor.cell >= 0) ++shared_sides;
    CHECK(shared_sides == 2 * 180);
  }
  SUBCASE("partially overlapping edges are rejected") {
    auto a = build_polygon_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 1, 0.1);
    auto b = build_polygon_domain({{1, 0.25}, {2, 0.25}, {2, 0.75}, {1, 0.75}}, 1, 0.1);
    CHECK_THROWS_WITH_AS(build_multidomain({a, b}), doctest::Contains("NonConforming"),
                         Error);
  }
}

TEST_CASE("non-conforming element grids are rejected") {
  auto left = build_polygon_domain({{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}}, 1, 0.1);
  auto right = build_polygon_domain({{0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}}, 1, 0.1);
  MultiDomain dom = build_multidomain({left, right});
  std::vector<std::vector<BoundaryElement>> elems;
  elems.push_back(subdivide_boundary(dom.cells[0], 1.0 / 3.0));  // 3 on the interface
  elems.push_back(subdivide_boundary(dom.cells[1], 0.25));       // 4 on the interface
  CHECK_THROWS_WITH_AS(make_discretization(dom, std::move(elems)),
                       doctest::Contains("NonConforming"), Error);
}

TEST_CASE("arclength lookup") {
  const SubDomain sq = unit_square();
  SUBCASE("mid bottom edge") {
    const auto [p, e] = arclength_to_point(sq, 0.5);
    CHECK(p.x == doctest::Approx(0.5));
    CHECK(p.y == doctest::Approx(0.0));
    CHECK(e == 0);
  }
  SUBCASE("vertex value belongs to the edge starting there") {
    const auto [p, e] = arclength_to_point(sq, 1.0);
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(0.0));
    CHECK(e == 1);
  }
  SUBCASE("walk around to the last edge") {
    const auto [p, e] = arclength_to_point(sq, 3.25);
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.75));
    CHECK(e == 3);
  }
  CHECK_THROWS_AS(arclength_to_point(sq, 4.0), Error);
  CHECK_THROWS_AS(arclength_to_point(sq, -0.1), Error);
}

TEST_CASE("shared-edge correspondence round trip") {
  const MultiDomain dom = unit_square_grid(4, 1.0, 0.1);
  const Discretization disc = build_discretization(dom, 0.1);
  for (const auto& cell : dom.cells) {
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      const EdgeNeighbor nb = cell.edges[e].neighbor;
      if (nb.cell < 0) continue;
      const int count = disc.edge_count[cell.id][e];
      REQUIRE(count == disc.edge_count[nb.cell][nb.edge]);
      for (int k = 0; k < count; ++k) {
        // Matching elements share physical midpoints (reversed traversal).
        const int m = count - 1 - k;
        const BoundaryElement& a = disc.elems[cell.id][disc.edge_first[cell.id][e] + k];
        const BoundaryElement& b =
            disc.elems[nb.cell][disc.edge_first[nb.cell][nb.edge] + m];
        const Edge& ea = cell.edges[e];
        const Edge& eb = dom.cells[nb.cell].edges[nb.edge];
        const Vec2 pa = ea.a + ea.tangent * ((a.s0 + a.s1) / 2.0 - ea.s0);
        const Vec2 pb = eb.a + eb.tangent * ((b.s0 + b.s1) / 2.0 - eb.s0);
        CHECK((pa - pb).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("random convex polygons: chords stay inside") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int built = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(u(rng) * 5);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * (i + 0.2 + 0.6 * u(rng)) / n;
      pts.push_back({std::cos(a), std::sin(a)});
    }
    SubDomain dom;
    try {
      dom = build_polygon_domain(pts, 1.0, 0.0);
    } catch (const Error&) {
      continue;  // radial wobble occasionally produces a reflex vertex
    }
    ++built;
    for (int k = 0; k < 20; ++k) {
      const auto [p, pe] = arclength_to_point(dom, u(rng) * dom.perimeter);
      const auto [q, qe] = arclength_to_point(dom, u(rng) * dom.perimeter);
      for (double t : {0.25, 0.5, 0.75}) {
        const Vec2 mid = p + (q - p) * t;
        CHECK(dom.contains(mid, -1e-9));
      }
    }
  }
  CHECK(built > 10);
}

TEST_CASE("mesh file round trip") {
  const TriMesh mesh = square_tri_mesh(0.25, 0.2, 3);
  const std::string path = "roundtrip_mesh.txt";
  write_mesh(mesh, path);
  const TriMesh back = load_mesh(path);
  REQUIRE(back.nodes.size() == mesh.nodes.size());
  REQUIRE(back.tris.size() == mesh.tris.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    CHECK((back.nodes[i] - mesh.nodes[i]).norm() == 0.0);
  CHECK(back.tris == mesh.tris);
  CHECK_THROWS_AS(load_mesh("no_such_mesh_file.txt"), Error);
}

TEST_CASE("shell multi-domain keeps 3D edge lengths and conformity") {
  const TriMesh mesh = wavy_shell_mesh(4, 0.1);
  const MultiDomain dom = build_shell_multidomain(mesh, 0.5, 0.1);
  REQUIRE(dom.cells.size() == mesh.tris.size());
  for (const auto& cell : dom.cells) {
    const auto& tri = mesh.tris[cell.id];
    for (int e = 0; e < 3; ++e) {
      const Vec3 a = mesh.nodes[tri[e]], b = mesh.nodes[tri[(e + 1) % 3]];
      CHECK(cell.edges[e].len == doctest::Approx((b - a).norm()).epsilon(1e-12));
      const EdgeNeighbor nb = cell.edges[e].neighbor;
      if (nb.cell >= 0)
        CHECK(cell.edges[e].len ==
              doctest::Approx(dom.cells[nb.cell].edges[nb.edge].len).epsilon(1e-12));
    }
    for (int v = 0; v < 3; ++v)
      CHECK((cell.to_world(cell.vertices[v]) - mesh.nodes[tri[v]]).norm() < 1e-12);
  }
}

TEST_CASE("forced free edges decouple mesh cells") {
  TriMesh mesh = square_tri_mesh(0.5, 0.0, 1);
  const MultiDomain before = build_shell_multidomain(mesh, 1.0, 0.1);
  int shared_before = 0;
  for (const auto& cell : before.cells)
    for (const Edge& e : cell.edges)
      if (e.neighbor.cell >= 0) ++shared_before;
  // Cut every interior edge of the first triangle.
  mesh.free_edges.push_back({mesh.tris[0][0], mesh.tris[0][1]});
  mesh.free_edges.push_back({mesh.tris[0][1], mesh.tris[0][2]});
  mesh.free_edges.push_back({mesh.tris[0][2], mesh.tris[0][0]});
  const MultiDomain after = build_shell_multidomain(mesh, 1.0, 0.1);
  int shared_after = 0;
  for (const auto& cell : after.cells)
    for (const Edge& e : cell.edges)
      if (e.neighbor.cell >= 0) ++shared_after;
  CHECK(shared_after < shared_before);
  for (const Edge& e : after.cells[0].edges) CHECK(e.neighbor.cell < 0);
}
