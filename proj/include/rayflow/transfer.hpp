// Sparse transfer-matrix assembly: analytic integration of the damped ray
// flow from every (element, direction) DOF to its receiving DOFs.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/directions.hpp"
#include "rayflow/geometry.hpp"

namespace rayflow {

// Packing of the multi-index (cell, element, local direction) onto
// 0..total-1, cells concatenated in order, elements in arclength order,
// directions ascending.
struct DofLayout {
  std::vector<int> cell_offset;               // per cell
  std::vector<std::vector<int>> elem_offset;  // per cell, relative to cell_offset
  std::vector<std::vector<int>> elem_ndirs;   // per cell, per element
  int total = 0;

  int flat(int cell, int elem, int n) const {
    return cell_offset[cell] + elem_offset[cell][elem] + n;
  }
  struct Dof {
    int cell, elem, n;
  };
  Dof unflat(int idx) const;
};

DofLayout build_dof_layout(const Discretization& disc, const DirectionTables& dirs);

// Reflection/transmission weights for a ray inside `cell` arriving at `edge`.
// `global_angle` is the propagation angle in the cell frame, `theta_arr` the
// arrival angle against the edge's inward normal. Free edges must return
// transmit == 0.
class InterfaceRule {
 public:
  struct RT {
    double reflect = 0.0;
    double transmit = 0.0;
  };
  virtual ~InterfaceRule() = default;
  virtual RT weights(const MultiDomain& dom, int cell, int edge,
                     double global_angle, double theta_arr) const = 0;
};

// Constant weights: free edges reflect with `free_reflect`, shared edges
// split (reflect, transmit). Per-edge overrides keyed by (cell, edge).
class UniformRule : public InterfaceRule {
 public:
  UniformRule(double reflect, double transmit, double free_reflect = 1.0)
      : reflect_(reflect), transmit_(transmit), free_reflect_(free_reflect) {}
  RT weights(const MultiDomain& dom, int cell, int edge, double global_angle,
             double theta_arr) const override;
  void set_override(int cell, int edge, RT rt);

 private:
  double reflect_, transmit_, free_reflect_;
  std::vector<std::pair<std::pair<int, int>, RT>> overrides_;
};

struct RayHit {
  int edge = -1;          // target edge (same cell)
  double s = 0.0;         // target arclength on the cell boundary
  Vec2 point;             // target point, cell coordinates
  double dist = 0.0;      // path length
  double theta_arr = 0.0; // arrival angle against the target inward normal
};

// Unique forward intersection of the ray leaving arclength s at local angle
// theta with the other edges of the convex cell.
RayHit trace_ray(const SubDomain& dom, double s, double theta);
RayHit trace_from(const SubDomain& dom, int src_edge, Vec2 origin, Vec2 dir);

// Integral of exp(-mu * (D0 + beta * (s - s_lo))) over [s_lo, s_hi]. The
// |mu * beta * ds| < 1e-8 branch switches to a first-order expansion; the
// closed form cancels catastrophically there.
double segment_integral(double D0, double beta, double s_lo, double s_hi, double mu);

struct SparseEntry {
  int row = 0;
  double value = 0.0;
};

struct ColumnBlock {
  int first_col = 0;
  std::vector<std::vector<SparseEntry>> cols;  // per column, sorted by row
};

struct AssemblyDiagnostics {
  std::int64_t branches = 0;         // emitted reflection/transmission branches
  std::int64_t grazing_dropped = 0;  // outgoing branches lost to the graze guard
  std::int64_t vertex_landings = 0;  // sweep splits landing on target vertices
};

struct AssemblyInputs {
  const MultiDomain* dom = nullptr;
  const Discretization* disc = nullptr;
  const DirectionTables* dirs = nullptr;
  const DofLayout* layout = nullptr;
  const InterfaceRule* rule = nullptr;
};

// All entries with source DOFs in cell j.
ColumnBlock assemble_column_block(const AssemblyInputs& in, int cell_j,
                                  AssemblyDiagnostics* diag = nullptr);

// Column-compressed sparse matrix plus a row-compressed mirror for the
// parallel matvec.
struct TransferMatrix {
  int n = 0;
  std::vector<std::int64_t> col_ptr;  // size n + 1
  std::vector<int> row_idx;
  std::vector<double> val;
  std::vector<std::int64_t> row_ptr;  // CSR mirror
  std::vector<int> col_idx;
  std::vector<double> val_csr;

  std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }
  // y = B x; deterministic for every team size.
  void matvec(const std::vector<double>& x, std::vector<double>& y, ExecPolicy exec) const;
};

TransferMatrix assemble(const AssemblyInputs& in, ExecPolicy exec,
                        AssemblyDiagnostics* diag = nullptr);

// Binary coordinate dump: u64 dimension, u64 nnz, then (u64 row, u64 col,
// f64 value) little-endian triplets in column order.
void dump_matrix(const TransferMatrix& B, const std::string& path);
TransferMatrix load_matrix_dump(const std::string& path);

}  // namespace rayflow
