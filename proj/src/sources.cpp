#include "rayflow/sources.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace rayflow {

double bending_slowness(double youngs, double density, double poisson, double thickness) {
  require(youngs > 0 && density > 0 && thickness > 0, Err::OutOfRange,
          "material constants must be positive");
  require(poisson > 0 && poisson < 0.5, Err::OutOfRange, "poisson must be in (0, 0.5)");
  return std::pow(12.0 * density * (1.0 - poisson * poisson) /
                      (youngs * thickness * thickness),
                  0.25);
}

double bending_wavenumber(const ShellPointSource& s) {
  return bending_slowness(s.youngs, s.density, s.poisson, s.thickness) * std::sqrt(s.omega);
}

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  // Nodes by Newton iteration on P_n; symmetric about 0.
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[i] = {-x, w};
    out[n - 1 - i] = {x, w};
  }
  return out;
}

DensityVector project_line_source(const LineSource& src, const MultiDomain& dom,
                                  const Discretization& disc, const DirectionTables& dirs,
                                  const DofLayout& layout) {
  require(std::abs(src.theta0) < kPi / 2.0 - kGrazeGuard, Err::Grazing,
          "line source direction within the grazing guard");
  const Vec3 d = normalized(src.line_dir);
  const double tol = 1e-9 * std::max(dom.diameter, 1.0);
  const auto on_line = [&](Vec3 p) {
    const Vec3 w = p - src.line_point;
    const Vec3 perp = w - d * dot(w, d);
    return perp.norm() <= tol;
  };

  DensityVector rho0(layout.total, 0.0);
  bool matched = false;
  for (const auto& cell : dom.cells) {
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      const Edge& ed = cell.edges[e];
      if (ed.neighbor.cell >= 0) continue;
      if (!on_line(cell.to_world(ed.a)) || !on_line(cell.to_world(ed.b))) continue;
      matched = true;
      const LocalDirectionMap& map = dirs.at(cell.id, static_cast<int>(e));
      int n = map.interval_index(src.theta0);
      // A delta sitting exactly on a test-interval boundary carries half its
      // mass into each adjacent bin (symmetric limit of the projection).
      bool on_break = false;
      if (n < static_cast<int>(map.breaks.size()) &&
          std::abs(src.theta0 - map.breaks[n]) <= 1e-9)
        on_break = true;
      else if (n > 0 && std::abs(src.theta0 - map.breaks[n - 1]) <= 1e-9) {
        on_break = true;
        --n;  // split between n and n + 1
      }
      const int first = disc.edge_first[cell.id][e];
      for (int k = 0; k < disc.edge_count[cell.id][e]; ++k) {
        const BoundaryElement& be = disc.elems[cell.id][first + k];
        const double mass = src.amplitude * std::sqrt(be.len);
        if (on_break) {
          rho0[layout.flat(cell.id, first + k, n)] += 0.5 * mass;
          rho0[layout.flat(cell.id, first + k, n + 1)] += 0.5 * mass;
        } else {
          rho0[layout.flat(cell.id, first + k, n)] += mass;
        }
      }
    }
  }
  require(matched, Err::NoMatchingEdge, "no free edge lies on the source line");
  return rho0;
}

namespace {

// Projects the direct illumination from a 2D point inside (or on a vertex of)
// cell j onto the DOFs fed through one of its edges. The element is split
// where the outgoing angle crosses a test-interval boundary; D(s) is smooth
// but nonlinear, so each sub-segment integrates with Gauss-Legendre.
struct FanWeights {
  double reflect = 0.0;
  double transmit = 0.0;
};

void project_fan_edge(const MultiDomain& dom, const Discretization& disc,
                      const DirectionTables& dirs, const DofLayout& layout, int j, int e,
                      Vec2 r0,
                      const std::function<double(double /*D*/, double /*cos_theta*/)>& amp,
                      const std::function<FanWeights(double /*global_angle*/,
                                                     double /*theta_arr*/)>& weights,
                      const std::vector<std::pair<double, double>>& quad,
                      DensityVector& rho0) {
  const SubDomain& cell = dom.cells[j];
  const Edge& ed = cell.edges[e];
  const EdgeNeighbor nb = ed.neighbor;
  const LocalDirectionMap& map_r = dirs.at(j, e);
  const LocalDirectionMap* map_t = (nb.cell >= 0) ? &dirs.at(nb.cell, nb.edge) : nullptr;

  // Arrival angle of the ray r0 -> P(s) against the inward normal.
  const auto theta_at = [&](double s) {
    const Vec2 p = ed.a + ed.tangent * (s - ed.s0);
    const Vec2 rd = normalized(r0 - p);
    return std::atan2(cross(rd, ed.normal), dot(rd, ed.normal));
  };
  // Boundary point where the direct ray arrives with local angle tau.
  const auto s_of_theta = [&](double tau) -> double {
    const Vec2 d = -direction_from_local(tau, ed.normal);
    const double den = cross(ed.tangent, d);
    if (std::abs(den) < 1e-300) return std::numeric_limits<double>::quiet_NaN();
    const double u = cross(r0 - ed.a, d) / den;
    const Vec2 p = ed.a + ed.tangent * u;
    if (dot(p - r0, d) <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return ed.s0 + u;
  };

  std::vector<double> taus;
  for (double b : map_r.breaks) taus.push_back(-b);
  if (map_t)
    for (double b : map_t->breaks) taus.push_back(b);

  const int first = disc.edge_first[j][e];
  const int count = disc.edge_count[j][e];
  for (int k = 0; k < count; ++k) {
    const BoundaryElement& be = disc.elems[j][first + k];
    std::vector<double> splits;
    for (double tau : taus) {
      const double s = s_of_theta(tau);
      if (std::isfinite(s) && s > be.s0 && s < be.s1) splits.push_back(s);
    }
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end(),
                             [&](double a, double b) { return b - a <= 1e-13 * be.len; }),
                 splits.end());

    const double inv_sqrt = 1.0 / std::sqrt(be.len);
    double a = be.s0;
    for (std::size_t q = 0; q <= splits.size(); ++q) {
      const double b = (q < splits.size()) ? splits[q] : be.s1;
      if (b - a <= 1e-15 * be.len) {
        a = b;
        continue;
      }
      const double smid = 0.5 * (a + b);
      const double theta_mid = theta_at(smid);
      if (std::abs(theta_mid) >= kPi / 2.0 - kGrazeGuard) {
        a = b;
        continue;
      }
      const Vec2 pmid = ed.a + ed.tangent * (smid - ed.s0);
      const double global_mid = std::atan2(pmid.y - r0.y, pmid.x - r0.x);
      const FanWeights w = weights(global_mid, theta_mid);
      if (w.reflect <= 0.0 && w.transmit <= 0.0) {
        a = b;
        continue;
      }
      double integral = 0.0;
      for (const auto& [xg, wg] : quad) {
        const double s = 0.5 * (a + b) + 0.5 * (b - a) * xg;
        const Vec2 p = ed.a + ed.tangent * (s - ed.s0);
        const double D = (p - r0).norm();
        integral += wg * amp(D, std::cos(theta_at(s)));
      }
      integral *= 0.5 * (b - a);

      if (w.reflect > 0.0) {
        const int n = map_r.interval_index(-theta_mid);
        rho0[layout.flat(j, first + k, n)] += w.reflect * integral * inv_sqrt;
      }
      if (w.transmit > 0.0 && map_t) {
        const int n = map_t->interval_index(theta_mid);
        const int m_nb = disc.edge_first[nb.cell][nb.edge] + (count - 1 - k);
        rho0[layout.flat(nb.cell, m_nb, n)] += w.transmit * integral * inv_sqrt;
      }
      a = b;
    }
  }
}

}  // namespace

DensityVector project_acoustic_point_source(const AcousticPointSource& src,
                                            const MultiDomain& dom,
                                            const Discretization& disc,
                                            const DirectionTables& dirs,
                                            const DofLayout& layout,
                                            const InterfaceRule& rule, int gauss_order) {
  require(src.omega > 0 && src.fluid_density > 0, Err::OutOfRange,
          "omega and fluid density must be positive");
  const int j = dom.locate_cell(src.position);
  require(j >= 0, Err::NotInCell, "source position is not inside any cell");
  const SubDomain& cell = dom.cells[j];
  require(cell.boundary_distance(src.position) >= 1e-9 * dom.diameter,
          Err::SourceOnBoundary, "source too close to the cell boundary");

  const auto quad = gauss_legendre(gauss_order);
  const double pref = src.omega * src.fluid_density / (8.0 * kPi);
  const double mu = cell.mu;
  const auto amp = [&](double D, double cos_theta) {
    return pref * cos_theta * std::exp(-mu * D) / D;
  };

  DensityVector rho0(layout.total, 0.0);
  for (std::size_t e = 0; e < cell.edges.size(); ++e) {
    const int ei = static_cast<int>(e);
    const auto weights = [&](double global_angle, double theta_arr) {
      const auto rt = rule.weights(dom, j, ei, global_angle, theta_arr);
      return FanWeights{rt.reflect, rt.transmit};
    };
    project_fan_edge(dom, disc, dirs, layout, j, ei, src.position, amp, weights, quad,
                     rho0);
  }
  return rho0;
}

std::vector<int> source_star_cells(const ShellPointSource& src, const MultiDomain& dom) {
  const double tol = 1e-9 * std::max(dom.diameter, 1.0);
  std::vector<int> star;
  for (const auto& cell : dom.cells)
    for (const Vec2& v : cell.vertices)
      if ((cell.to_world(v) - src.position).norm() <= tol) {
        star.push_back(cell.id);
        break;
      }
  require(!star.empty(), Err::SourceNotVertex,
          "shell source position does not coincide with a mesh vertex");
  return star;
}

DensityVector project_shell_point_source(const ShellPointSource& src,
                                         const MultiDomain& dom,
                                         const Discretization& disc,
                                         const DirectionTables& dirs,
                                         const DofLayout& layout, int gauss_order) {
  const std::vector<int> star = source_star_cells(src, dom);
  const auto quad = gauss_legendre(gauss_order);
  const double k = bending_wavenumber(src);
  const double pref = k * k / (16.0 * kPi * src.thickness * src.density *
                               std::pow(src.omega, 1.5));
  const double vert_tol = 1e-9 * std::max(dom.diameter, 1.0);

  DensityVector rho0(layout.total, 0.0);
  for (int j : star) {
    const SubDomain& cell = dom.cells[j];
    // Local coordinates of the source vertex in this cell.
    Vec2 r0{};
    bool found = false;
    for (const Vec2& v : cell.vertices)
      if ((cell.to_world(v) - src.position).norm() <= vert_tol) {
        r0 = v;
        found = true;
        break;
      }
    require(found, Err::SourceNotVertex, "star cell lost the source vertex");

    const double mu = cell.mu;
    const auto amp = [&](double D, double cos_theta) {
      return pref * cos_theta * std::exp(-mu * D) / D;
    };
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      const Edge& ed = cell.edges[e];
      // Edges through the source vertex see it at grazing incidence only.
      if ((ed.a - r0).norm() <= vert_tol || (ed.b - r0).norm() <= vert_tol) continue;
      // Flat homogeneous neighborhood: free edges of star cells reflect with
      // weight one, shared edges feed the non-star neighbor with weight one.
      const bool free_edge = ed.neighbor.cell < 0;
      const auto weights = [&](double, double) {
        return free_edge ? FanWeights{1.0, 0.0} : FanWeights{0.0, 1.0};
      };
      project_fan_edge(dom, disc, dirs, layout, j, static_cast<int>(e), r0, amp,
                       weights, quad, rho0);
    }
  }
  return rho0;
}

}  // namespace rayflow
