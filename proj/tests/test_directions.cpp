#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rayflow/directions.hpp"
#include "rayflow/meshgen.hpp"

using namespace rayflow;

namespace {

SubDomain unit_square() {
  return build_polygon_domain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 1.0, 0.0);
}

}  // namespace

TEST_CASE("global direction sets") {
  const auto four = make_global_directions(4);
  REQUIRE(four.count() == 4);
  CHECK(four.angles[0] == doctest::Approx(0.0));
  CHECK(four.angles[1] == doctest::Approx(kPi / 2));
  CHECK(four.angles[2] == doctest::Approx(kPi));
  CHECK(four.angles[3] == doctest::Approx(3 * kPi / 2));

  const auto off = make_offset_directions(8);
  for (int l = 0; l < 8; ++l)
    CHECK(off.angles[l] == doctest::Approx((2.0 * l + 1.0) * kPi / 8));

  CHECK_THROWS_WITH_AS(make_global_directions(2), doctest::Contains("TooFew"), Error);
  CHECK_THROWS_AS(make_custom_directions({0.0, 0.5}), Error);
  CHECK_THROWS_AS(make_custom_directions({0.5, 0.4, 1.0}), Error);
  CHECK_THROWS_AS(make_custom_directions({0.0, 1.0, 7.0}), Error);
}

TEST_CASE("local map for a bottom edge at L=8") {
  const SubDomain sq = unit_square();
  const auto map = local_directions(sq, 0, make_global_directions(8));
  // gamma = pi/2; inward set {3pi/4, pi/2, pi/4} maps to {-pi/4, 0, pi/4}.
  REQUIRE(map.size() == 3);
  CHECK(map.entries[0].phi == doctest::Approx(-kPi / 4));
  CHECK(map.entries[1].phi == doctest::Approx(0.0));
  CHECK(map.entries[2].phi == doctest::Approx(kPi / 4));
  CHECK(map.entries[0].global == 3);  // 3pi/4
  CHECK(map.entries[1].global == 2);  // pi/2
  CHECK(map.entries[2].global == 1);  // pi/4
  CHECK(map.entries[2].p == doctest::Approx(std::sin(kPi / 4)));

  // Interval boundaries at the node midpoints.
  REQUIRE(map.breaks.size() == 2);
  CHECK(map.breaks[0] == doctest::Approx(-kPi / 8));
  CHECK(map.breaks[1] == doctest::Approx(kPi / 8));
}

TEST_CASE("L=4 bottom edge keeps only the perpendicular direction") {
  const SubDomain sq = unit_square();
  const auto map = local_directions(sq, 0, make_global_directions(4));
  REQUIRE(map.size() == 1);
  CHECK(map.entries[0].phi == doctest::Approx(0.0));
  CHECK(map.entries[0].global == 1);
}

TEST_CASE("interval lookup and tie-breaks") {
  const SubDomain sq = unit_square();
  const auto map = local_directions(sq, 0, make_global_directions(8));
  // Left-open, right-closed at interior boundaries.
  CHECK(map.interval_index(-kPi / 8) == 0);
  CHECK(map.interval_index(std::nextafter(-kPi / 8, 1.0)) == 1);
  CHECK(map.interval_index(0.3) == 2);
  CHECK(map.interval_index(-1.5) == 0);
  CHECK(map.interval_index(1.5) == 2);
  CHECK_THROWS_WITH_AS(map.interval_index(kPi / 2), doctest::Contains("Grazing"), Error);
  CHECK_THROWS_AS(map.interval_index(-kPi / 2 + 1e-12), Error);
}

TEST_CASE("petrov orthonormality: each node lands in its own interval") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int L = 3 + static_cast<int>(u(rng) * 64);
    const auto dirs = (trial % 2 == 0) ? make_global_directions(L)
                                       : make_offset_directions(L);
    // Random edge orientation via a rotated triangle.
    const double rot = 2.0 * kPi * u(rng);
    const auto R = [rot](Vec2 p) {
      return Vec2{p.x * std::cos(rot) - p.y * std::sin(rot),
                  p.x * std::sin(rot) + p.y * std::cos(rot)};
    };
    SubDomain tri;
    try {
      tri = build_polygon_domain({R({0, 0}), R({1, 0}), R({0.3, 0.8})}, 1.0, 0.0);
    } catch (const Error&) {
      continue;
    }
    for (int e = 0; e < 3; ++e) {
      LocalDirectionMap map;
      try {
        map = local_directions(tri, e, dirs);
      } catch (const Error& err) {
        CHECK(err.code() == Err::EmptyLocalSet);
        continue;
      }
      for (int n = 0; n < map.size(); ++n) {
        CHECK(map.interval_index(map.entries[n].phi) == n);
        CHECK(map.index_of_global(map.entries[n].global) == n);
      }
      // Intervals partition (-pi/2, pi/2): untouched angles resolve uniquely.
      for (int k = 0; k < 10; ++k) {
        const double theta = (u(rng) - 0.5) * (kPi - 1e-6);
        const int n = map.interval_index(theta);
        CHECK(n >= 0);
        CHECK(n < map.size());
      }
    }
  }
}

TEST_CASE("axis-aligned edges get symmetric local sets when 4 divides L") {
  const SubDomain sq = unit_square();
  for (int L : {4, 8, 16, 64}) {
    for (int e = 0; e < 4; ++e) {
      const auto map = local_directions(sq, e, make_global_directions(L));
      for (int n = 0; n < map.size(); ++n)
        CHECK(map.entries[n].phi ==
              doctest::Approx(-map.entries[map.size() - 1 - n].phi).epsilon(1e-12));
    }
  }
}

TEST_CASE("cell frames") {
  SUBCASE("z-normal is the identity") {
    const CellFrame f = cell_frame({0, 0, 1});
    CHECK((f.u - Vec3{1, 0, 0}).norm() == 0.0);
    CHECK((f.v - Vec3{0, 1, 0}).norm() == 0.0);
    CHECK((f.n - Vec3{0, 0, 1}).norm() == 0.0);
  }
  SUBCASE("x-normal rotates about the y-axis by pi/2") {
    const CellFrame f = cell_frame({1, 0, 0});
    CHECK((f.n - Vec3{1, 0, 0}).norm() < 1e-15);
    CHECK((f.u - Vec3{0, 0, -1}).norm() < 1e-15);
    CHECK((f.v - Vec3{0, 1, 0}).norm() < 1e-15);
  }
  SUBCASE("frames are proper orthonormal") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      Vec3 n{u(rng), u(rng), std::abs(u(rng)) + 0.05};
      const CellFrame f = cell_frame(normalized(n));
      CHECK(std::abs(dot(f.u, f.v)) < 1e-12);
      CHECK(std::abs(dot(f.u, f.n)) < 1e-12);
      CHECK(std::abs(f.u.norm() - 1.0) < 1e-12);
      CHECK(dot(cross(f.u, f.v), f.n) == doctest::Approx(1.0));
    }
  }
  SUBCASE("coplanar cells receive identical frames") {
    const Vec3 n = normalized(Vec3{0.3, -0.2, 0.9});
    const CellFrame a = cell_frame(n), b = cell_frame(n);
    CHECK((a.u - b.u).norm() == 0.0);
    CHECK((a.v - b.v).norm() == 0.0);
  }
  SUBCASE("antipodal normal is rejected") {
    CHECK_THROWS_WITH_AS(cell_frame({0, 0, -1}), doctest::Contains("NormalFlip"), Error);
  }
}

TEST_CASE("transmission across a coplanar interface preserves the direction") {
  auto left = build_polygon_domain({{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}}, 1, 0.1);
  auto right = build_polygon_domain({{0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}}, 1, 0.1);
  const MultiDomain dom = build_multidomain({left, right});
  const auto dirs = make_global_directions(16);
  // Ray in cell 0 along global angle Phi crossing the vertical interface.
  for (int l : {0, 1, 2, 14, 15}) {
    const double Phi = dirs.angles[l];
    const Edge& ed = dom.cells[0].edges[1];
    if (std::cos(Phi - ed.gamma) > -1e-6) continue;  // not arriving at the interface
    const double theta_arr = wrap_pm_pi(ed.gamma - Phi - kPi);
    const double Phi_out = transmit_direction(dom, 0, 1, theta_arr);
    CHECK(wrap_two_pi(Phi_out) == doctest::Approx(wrap_two_pi(Phi)).epsilon(1e-12));
  }
  CHECK_THROWS_WITH_AS(transmit_direction(dom, 0, 0, 0.1), doctest::Contains("NotShared"),
                       Error);
}

TEST_CASE("transmission across a fold matches explicit 3D unfolding") {
  // Two triangles sharing the edge (0,0,0)-(1,0,0); the second tilted by a
  // dihedral fold about it.
  const double fold = 0.7;
  TriMesh mesh;
  mesh.nodes = {{0, 0, 0}, {1, 0, 0}, {0.4, 0.9, 0},
                {0.6, -0.8 * std::cos(fold), 0.8 * std::sin(fold)}};
  mesh.tris = {{0, 1, 2}, {1, 0, 3}};
  const MultiDomain dom = build_shell_multidomain(mesh, 1.0, 0.0);
  const Edge* shared = nullptr;
  int edge_idx = -1;
  for (int e = 0; e < 3; ++e)
    if (dom.cells[0].edges[e].neighbor.cell == 1) {
      shared = &dom.cells[0].edges[e];
      edge_idx = e;
    }
  REQUIRE(shared != nullptr);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int k = 0; k < 30; ++k) {
    const double theta_arr = u(rng);
    const double Phi_i = transmit_direction(dom, 0, edge_idx, theta_arr);
    // Oracle: rotate the arriving 3D direction about the shared edge by the
    // dihedral angle, then read its angle in the receiving frame. The
    // incoming direction is the reverse of the vector whose local angle
    // defines theta_arr.
    const SubDomain& a = dom.cells[0];
    const SubDomain& b = dom.cells[1];
    const Vec2 d2 = direction_from_local(theta_arr, -shared->normal);
    const Vec3 d3 = a.axis_u * d2.x + a.axis_v * d2.y;
    const Vec3 axis = normalized(Vec3{1, 0, 0});  // shared edge direction
    const double ang = std::acos(std::clamp(dot(a.axis_n, b.axis_n), -1.0, 1.0));
    const double sgn = dot(cross(a.axis_n, b.axis_n), axis) > 0 ? 1.0 : -1.0;
    const double c = std::cos(sgn * ang), s = std::sin(sgn * ang);
    const Vec3 rotated = d3 * c + cross(axis, d3) * s + axis * (dot(axis, d3) * (1 - c));
    const double Phi_oracle =
        wrap_two_pi(std::atan2(dot(rotated, b.axis_v), dot(rotated, b.axis_u)));
    CHECK(wrap_two_pi(Phi_i) == doctest::Approx(Phi_oracle).epsilon(1e-9));
  }
}
