// Interior energy reconstruction: global ray summation over the direction
// set plus the direct source field in the source cell.
#pragma once

#include <cstdint>
#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/directions.hpp"
#include "rayflow/geometry.hpp"
#include "rayflow/solve.hpp"
#include "rayflow/sources.hpp"
#include "rayflow/transfer.hpp"

namespace rayflow {

struct SamplePoint {
  int cell = 0;
  Vec2 pos;  // cell-local coordinates
};

struct EvalDiagnostics {
  std::int64_t terms = 0;
  std::int64_t grazing_skipped = 0;
  std::int64_t vertex_hits = 0;
};

struct InteriorField {
  std::vector<SamplePoint> points;
  std::vector<double> values;
  double alpha = 1.0;  // 1 Helmholtz, 2 biharmonic
  EvalDiagnostics diag;
};

struct BackTrace {
  int edge = -1;
  int elem = -1;
  double s = 0.0;
  double theta = 0.0;  // departure angle at the boundary, vs inward normal
  double dist = 0.0;
  bool vertex_hit = false;
};

// Boundary point behind `point` along global direction l: the ray leaving
// (s, theta) passes through the point after `dist`. The local direction index
// is resolved by global index (the reconstruction samples basis nodes only).
BackTrace back_trace(const SubDomain& cell, const Discretization& disc, int cell_id,
                     Vec2 point, double global_angle);

InteriorField evaluate_interior(const MultiDomain& dom, const Discretization& disc,
                                const DirectionTables& dirs, const DofLayout& layout,
                                const DensityVector& rho,
                                std::vector<SamplePoint> points, double alpha,
                                ExecPolicy exec);

// Direct (line-of-sight) energy density at distance d from the source.
double direct_field(const AcousticPointSource& src, double eta, double mu, double d);
double direct_field(const ShellPointSource& src, double mu, double d);

}  // namespace rayflow
