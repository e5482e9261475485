// Initial boundary densities: line sources and point sources projected onto
// the element/direction basis.
#pragma once

#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/directions.hpp"
#include "rayflow/geometry.hpp"
#include "rayflow/transfer.hpp"

namespace rayflow {

// Line source on the free edges lying on a world-space line: delta in
// momentum at local angle theta0, constant amplitude along the edge.
struct LineSource {
  Vec3 line_point;
  Vec3 line_dir;
  double theta0 = 0.0;
  double amplitude = 1.0;
};

// Monopole in a planar acoustic domain; illuminates the boundary of the cell
// containing it (reflection branch) and the neighbor side of its interface
// edges (transmission branch).
struct AcousticPointSource {
  Vec2 position;
  double omega = 0.0;
  double fluid_density = 1.0;
};

// Bending-wave point source at a mesh vertex of a shell. k = eta * sqrt(omega)
// with eta = (12 rho (1 - nu^2) / (E h^2))^(1/4).
struct ShellPointSource {
  Vec3 position;
  double omega = 0.0;
  double thickness = 0.0;
  double youngs = 0.0;
  double density = 0.0;
  double poisson = 0.0;
};

double bending_slowness(double youngs, double density, double poisson, double thickness);
double bending_wavenumber(const ShellPointSource& s);

// Gauss-Legendre nodes/weights on [-1, 1].
std::vector<std::pair<double, double>> gauss_legendre(int n);

DensityVector project_line_source(const LineSource& src, const MultiDomain& dom,
                                  const Discretization& disc, const DirectionTables& dirs,
                                  const DofLayout& layout);

// gauss_order points per sub-segment; elements are split wherever the direct
// ray's outgoing angle crosses a test-interval boundary so each sub-segment
// feeds exactly one DOF.
DensityVector project_acoustic_point_source(const AcousticPointSource& src,
                                            const MultiDomain& dom,
                                            const Discretization& disc,
                                            const DirectionTables& dirs,
                                            const DofLayout& layout,
                                            const InterfaceRule& rule,
                                            int gauss_order = 16);

DensityVector project_shell_point_source(const ShellPointSource& src,
                                         const MultiDomain& dom,
                                         const Discretization& disc,
                                         const DirectionTables& dirs,
                                         const DofLayout& layout,
                                         int gauss_order = 16);

// Cells whose closure contains the source vertex (receive the direct field).
std::vector<int> source_star_cells(const ShellPointSource& src, const MultiDomain& dom);

}  // namespace rayflow
