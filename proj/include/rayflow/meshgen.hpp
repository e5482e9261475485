// Synthetic benchmark meshes: jittered triangulations of the unit square, the
// developable quarter-cylinder ridge, and a wavy test shell.
#pragma once

#include <cstdint>

#include "rayflow/geometry.hpp"

namespace rayflow {

// Triangulation of the unit square with interior nodes jittered by
// jitter * h (deterministic hash of the node index and seed) and hash-chosen
// diagonals. jitter = 0 gives the structured criss-cross grid.
TriMesh square_tri_mesh(double h, double jitter = 0.25, std::uint64_t seed = 1);

// Unit-square parameter domain mapped onto the ridge profile: flat for
// x in [0, 1/3], quarter cylinder of radius 2/(3*pi) for (1/3, 2/3), flat and
// vertical beyond. The parametrization is an isometry, so the curvilinear
// coordinate plays the role of x. Seam columns are kept unjittered.
TriMesh ridge_tri_mesh(double h, double jitter = 0.0, std::uint64_t seed = 1);
// Profile map and its inverse (arclength coordinate from a surface point).
Vec3 ridge_profile(double x_curv, double y);
double ridge_arclength_of(Vec3 p);

// Doubly curved test surface z = amp * sin(2 pi x) * sin(2 pi y) on an
// n x n grid (2 n^2 cells).
TriMesh wavy_shell_mesh(int n, double amp);

// Quarter cylinder of given radius: x in [0, extent] wraps the arc, y runs
// along the axis (length 1).
TriMesh cylinder_patch_mesh(double radius, double h);

// Unit-square quad grid as a planar multi-domain (N x N cells).
MultiDomain unit_square_grid(int n, double eta, double mu);

MultiDomain planar_domain_from_mesh(const TriMesh& mesh, double eta, double mu);

}  // namespace rayflow
