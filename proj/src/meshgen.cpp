#include "rayflow/meshgen.hpp"

#include <algorithm>
#include <cmath>

namespace rayflow {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1).
double hash_unit(std::uint64_t seed, std::uint64_t i, std::uint64_t j, std::uint64_t tag) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(i ^ splitmix64(j ^ (tag << 17))));
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

struct GridMesh {
  int nx, ny;
  std::vector<Vec2> param;  // (nx+1) x (ny+1) parameter-space nodes
  std::vector<std::array<int, 3>> tris;

  int id(int i, int j) const { return j * (nx + 1) + i; }
};

GridMesh grid_triangulation(int nx, int ny, double jitter, std::uint64_t seed,
                            bool keep_thirds) {
  GridMesh g;
  g.nx = nx;
  g.ny = ny;
  g.param.resize((nx + 1) * (ny + 1));
  const double hx = 1.0 / nx, hy = 1.0 / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      double x = i * hx, y = j * hy;
      const bool boundary = (i == 0 || i == nx || j == 0 || j == ny);
      const bool seam = keep_thirds && (3 * i == nx || 3 * i == 2 * nx);
      if (!boundary && !seam && jitter > 0.0) {
        x += jitter * hx * hash_unit(seed, i, j, 1);
        y += jitter * hy * hash_unit(seed, i, j, 2);
      }
      g.param[g.id(i, j)] = {x, y};
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = g.id(i, j), b = g.id(i + 1, j), c = g.id(i + 1, j + 1), d = g.id(i, j + 1);
      const bool diag = jitter > 0.0 ? (hash_unit(seed, i, j, 3) >= 0.0) : ((i + j) % 2 == 0);
      if (diag) {
        g.tris.push_back({a, b, c});
        g.tris.push_back({a, c, d});
      } else {
        g.tris.push_back({a, b, d});
        g.tris.push_back({b, c, d});
      }
    }
  return g;
}

}  // namespace

TriMesh square_tri_mesh(double h, double jitter, std::uint64_t seed) {
  const int n = std::max(1, static_cast<int>(std::llround(1.0 / h)));
  const GridMesh g = grid_triangulation(n, n, jitter, seed, false);
  TriMesh mesh;
  mesh.nodes.reserve(g.param.size());
  for (const Vec2& p : g.param) mesh.nodes.push_back({p.x, p.y, 0.0});
  mesh.tris = g.tris;
  return mesh;
}

Vec3 ridge_profile(double x_curv, double y) {
  const double R = 2.0 / (3.0 * kPi);
  if (x_curv <= 1.0 / 3.0) return {x_curv, y, 0.0};
  if (x_curv >= 2.0 / 3.0) return {1.0 / 3.0 + R, y, R + (x_curv - 2.0 / 3.0)};
  const double a = (x_curv - 1.0 / 3.0) / R;  // arc angle in [0, pi/2]
  return {1.0 / 3.0 + R * std::sin(a), y, R * (1.0 - std::cos(a))};
}

double ridge_arclength_of(Vec3 p) {
  const double R = 2.0 / (3.0 * kPi);
  if (p.z <= 1e-12) return p.x;
  if (p.x >= 1.0 / 3.0 + R - 1e-12) return 2.0 / 3.0 + (p.z - R);
  return 1.0 / 3.0 + R * std::asin(std::clamp((p.x - 1.0 / 3.0) / R, 0.0, 1.0));
}

TriMesh ridge_tri_mesh(double h, double jitter, std::uint64_t seed) {
  // Grid count divisible by 3 so the seams are mesh lines.
  const int nx = 3 * std::max(1, static_cast<int>(std::llround(1.0 / (3.0 * h))));
  const int ny = std::max(1, static_cast<int>(std::llround(1.0 / h)));
  const GridMesh g = grid_triangulation(nx, ny, jitter, seed, true);
  TriMesh mesh;
  mesh.nodes.reserve(g.param.size());
  for (const Vec2& p : g.param) mesh.nodes.push_back(ridge_profile(p.x, p.y));
  mesh.tris = g.tris;
  return mesh;
}

TriMesh wavy_shell_mesh(int n, double amp) {
  const GridMesh g = grid_triangulation(n, n, 0.0, 1, false);
  TriMesh mesh;
  mesh.nodes.reserve(g.param.size());
  for (const Vec2& p : g.param)
    mesh.nodes.push_back(
        {p.x, p.y, amp * std::sin(2.0 * kPi * p.x) * std::sin(2.0 * kPi * p.y)});
  mesh.tris = g.tris;
  return mesh;
}

TriMesh cylinder_patch_mesh(double radius, double h) {
  // Arc length pi/2 * radius along x, unit length along y.
  const double extent = 0.5 * kPi * radius;
  const int nx = std::max(1, static_cast<int>(std::llround(extent / h)));
  const int ny = std::max(1, static_cast<int>(std::llround(1.0 / h)));
  const GridMesh g = grid_triangulation(nx, ny, 0.0, 1, false);
  TriMesh mesh;
  mesh.nodes.reserve(g.param.size());
  for (const Vec2& p : g.param) {
    const double a = p.x * extent / radius;  // angle in [0, pi/2]
    mesh.nodes.push_back({radius * std::sin(a), p.y, radius * (1.0 - std::cos(a))});
  }
  mesh.tris = g.tris;
  return mesh;
}

MultiDomain unit_square_grid(int n, double eta, double mu) {
  std::vector<SubDomain> cells;
  cells.reserve(static_cast<std::size_t>(n) * n);
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x0 = i * h, x1 = (i + 1 == n) ? 1.0 : (i + 1) * h;
      const double y0 = j * h, y1 = (j + 1 == n) ? 1.0 : (j + 1) * h;
      cells.push_back(
          build_polygon_domain({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, eta, mu));
    }
  return build_multidomain(std::move(cells));
}

MultiDomain planar_domain_from_mesh(const TriMesh& mesh, double eta, double mu) {
  for (const Vec3& p : mesh.nodes)
    require(std::abs(p.z) < 1e-12, Err::OutOfRange, "mesh is not planar");
  std::vector<SubDomain> cells;
  cells.reserve(mesh.tris.size());
  for (const auto& t : mesh.tris) {
    std::vector<Vec2> v = {{mesh.nodes[t[0]].x, mesh.nodes[t[0]].y},
                           {mesh.nodes[t[1]].x, mesh.nodes[t[1]].y},
                           {mesh.nodes[t[2]].x, mesh.nodes[t[2]].y}};
    cells.push_back(build_polygon_domain(std::move(v), eta, mu));
  }
  return build_multidomain(std::move(cells));
}

}  // namespace rayflow
