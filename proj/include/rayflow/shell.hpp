// Curvature physics for triangulated shells: quadric curvature estimation,
// the bending-wave transmission threshold, and the curvature interface rule.
#pragma once

#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/directions.hpp"
#include "rayflow/geometry.hpp"
#include "rayflow/transfer.hpp"

namespace rayflow {

struct CellCurvature {
  Vec3 e1{1, 0, 0};  // principal direction of maximum |curvature|, unit, in plane
  Vec3 e2{0, 1, 0};
  double k1 = 0.0;  // signed, |k1| >= |k2|, sign-normalized so k1 >= 0
  double k2 = 0.0;
  bool flat = true;
};

struct CurvatureData {
  std::vector<CellCurvature> cells;
  double flat_tol = 0.0;
};

// Least-squares quadric z = a x^2 + b xy + c y^2 over the vertex neighborhood
// (`rings` vertex rings around each cell) in the cell frame; curvatures from
// the shape matrix [[2a, b], [b, 2c]]. Cells with |k1| below
// 1e-3 / domain-diameter are flagged flat.
CurvatureData estimate_curvature(const MultiDomain& dom, int neighborhood_rings = 2);

// theta* = atan(ky_max / sqrt(k^2 - ky_max^2)); ky_max == k gives pi/2
// (always transmit). Angles are measured from the principal direction of
// maximum curvature of the receiving cell.
double threshold_angle(double k, double ky_max);

struct ThresholdProvenance {
  enum Kind { Computed, UserSupplied } kind = Computed;
};

// Per edge side (cell, edge): the transmission threshold of the receiving
// cell behind that edge (pi/2 when the receiver is flat).
struct ThresholdTable {
  std::vector<std::vector<double>> theta_star;  // [cell][edge]
  ThresholdProvenance provenance;
};

ThresholdTable build_threshold_table(const MultiDomain& dom, const CurvatureData& curv,
                                     double k, double ky_max);
ThresholdTable build_threshold_table_fixed(const MultiDomain& dom,
                                           const CurvatureData& curv,
                                           double theta_star);

// Binary reflection/transmission per direction: transmit when the incoming
// ray's angle psi to the receiver's maximum-curvature direction is below
// theta*; otherwise classify by the angle of the specularly reflected ray
// (below theta* -> transmission, else reflection). Free edges reflect.
class CurvatureRule : public InterfaceRule {
 public:
  CurvatureRule(CurvatureData curv, ThresholdTable thresholds, double free_reflect = 1.0)
      : curv_(std::move(curv)), thresholds_(std::move(thresholds)),
        free_reflect_(free_reflect) {}

  RT weights(const MultiDomain& dom, int cell, int edge, double global_angle,
             double theta_arr) const override;

 private:
  CurvatureData curv_;
  ThresholdTable thresholds_;
  double free_reflect_;
};

}  // namespace rayflow
