#include "rayflow/interior.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rayflow {

BackTrace back_trace(const SubDomain& cell, const Discretization& disc, int cell_id,
                     Vec2 point, double global_angle) {
  require(cell.contains(point), Err::NotInCell, "point outside the cell");
  const Vec2 d{std::cos(global_angle), std::sin(global_angle)};
  const RayHit hit = trace_from(cell, -1, point, -d);

  BackTrace bt;
  bt.edge = hit.edge;
  bt.s = hit.s;
  bt.dist = hit.dist;
  // Departure angle of the forward ray (direction d) at the boundary point.
  bt.theta = local_angle_of_direction(d, cell.edges[hit.edge].normal);
  bt.elem = disc.element_at(cell_id, hit.s);
  const Edge& ed = cell.edges[hit.edge];
  const double u = hit.s - ed.s0;
  const double vtol = 1e-12 * cell.diameter;
  bt.vertex_hit = (u <= vtol) || (ed.len - u <= vtol);
  return bt;
}

InteriorField evaluate_interior(const MultiDomain& dom, const Discretization& disc,
                                const DirectionTables& dirs, const DofLayout& layout,
                                const DensityVector& rho,
                                std::vector<SamplePoint> points, double alpha,
                                ExecPolicy exec) {
  InteriorField field;
  field.alpha = alpha;
  field.points = std::move(points);
  field.values.assign(field.points.size(), 0.0);
  const int L = dirs.global.count();
  const int npts = static_cast<int>(field.points.size());

  std::vector<EvalDiagnostics> diags(exec.is_serial() ? 1 : exec.team_size());

  const auto eval_one = [&](int p, EvalDiagnostics& dg) {
    const SamplePoint& sp = field.points[p];
    const SubDomain& cell = dom.cells[sp.cell];
    double acc = 0.0;
    for (int l = 0; l < L; ++l) {
      const double Phi = dirs.global.angles[l];
      const Vec2 d{std::cos(Phi), std::sin(Phi)};
      const RayHit hit = trace_from(cell, -1, sp.pos, -d);
      const Edge& ed = cell.edges[hit.edge];
      ++dg.terms;
      const double u = hit.s - ed.s0;
      const double vtol = 1e-12 * cell.diameter;
      if (u <= vtol || ed.len - u <= vtol) ++dg.vertex_hits;
      const double theta = local_angle_of_direction(d, ed.normal);
      const double ct = std::cos(theta);
      if (ct < kGrazeGuard) {
        ++dg.grazing_skipped;
        continue;
      }
      const LocalDirectionMap& map = dirs.at(sp.cell, hit.edge);
      const int n = map.index_of_global(l);
      if (n < 0) {
        // Direction excluded from this edge's inward set by the graze guard.
        ++dg.grazing_skipped;
        continue;
      }
      const int m = disc.element_at(sp.cell, hit.s);
      const double coef = rho[layout.flat(sp.cell, m, n)];
      if (coef == 0.0) continue;
      acc += std::exp(-cell.mu * hit.dist) * coef /
             (std::sqrt(disc.elems[sp.cell][m].len) * ct);
    }
    field.values[p] = cell.eta / alpha * acc;
  };

  if (exec.is_serial()) {
    for (int p = 0; p < npts; ++p) eval_one(p, diags[0]);
  } else {
#ifdef _OPENMP
#pragma omp parallel num_threads(exec.team_size())
    {
      EvalDiagnostics local;
#pragma omp for schedule(static)
      for (int p = 0; p < npts; ++p) eval_one(p, local);
      const int tid = omp_get_thread_num();
      diags[tid] = local;
    }
#else
    for (int p = 0; p < npts; ++p) eval_one(p, diags[0]);
#endif
  }
  for (const auto& dg : diags) {
    field.diag.terms += dg.terms;
    field.diag.grazing_skipped += dg.grazing_skipped;
    field.diag.vertex_hits += dg.vertex_hits;
  }
  return field;
}

double direct_field(const AcousticPointSource& src, double eta, double mu, double d) {
  require(d >= 1e-9, Err::AtSource, "evaluation point coincides with the source");
  return src.fluid_density * src.omega * eta * std::exp(-mu * d) / (8.0 * kPi * d);
}

double direct_field(const ShellPointSource& src, double mu, double d) {
  require(d >= 1e-9, Err::AtSource, "evaluation point coincides with the source");
  const double k = bending_wavenumber(src);
  return k * k * std::exp(-mu * d) /
         (16.0 * kPi * src.thickness * src.density * std::pow(src.omega, 1.5) * d);
}

}  // namespace rayflow
