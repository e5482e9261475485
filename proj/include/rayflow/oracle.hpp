// Reference solutions and error metrics: the parallel-wall closed form, the
// image source method on convex domains, and MRE / mean-error / EOC.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/geometry.hpp"

namespace rayflow {

// (exp(-mu x) + exp(-mu (2 - x))) / (1 - exp(-2 mu)) for x in [0, 1].
double analytic_parallel_wall(double x, double mu);

// sum |approx - exact| / sum exact
double mre(std::span<const double> approx, std::span<const double> exact);
// |sum approx - sum exact| / sum exact
double mean_error(std::span<const double> approx, std::span<const double> exact);
// EOC_k = log2(e_{k-1} / e_k)
std::vector<double> eoc(std::span<const double> errors);

struct ImageSourceParams {
  double omega = 0.0;
  double fluid_density = 1.0;
  double eta = 1.0;
  double mu = 0.0;
};

// Mirror images of a point source in a convex polygon up to max_order
// reflections. An axis-aligned rectangle uses the exact reflection lattice
// (every image is valid for every interior receiver); general convex polygons
// enumerate mirror sequences with angular beam pruning, validity per receiver
// being membership of the unfolded direction in the sequence's beam.
class ImageSourceOracle {
 public:
  ImageSourceOracle(std::vector<Vec2> polygon, Vec2 source, int max_order);

  double field(Vec2 r, const ImageSourceParams& p) const;
  std::vector<double> field(const std::vector<Vec2>& pts, const ImageSourceParams& p,
                            ExecPolicy exec) const;

  std::int64_t image_count() const;
  bool rectangle_path() const { return rect_; }

  // Unfolded image positions restricted to pure x-fold sequences (rectangle
  // path only); exposes the 1D sub-series structure.
  std::vector<Vec2> axis_images_x() const;

  struct Image {
    Vec2 pos;        // unfolded receiver map applied as pos = M r (see impl)
    double a0 = 0.0; // beam interval start (direction from source)
    double width = 0.0;
    double mxx = 1, mxy = 0, myx = 0, myy = 1;  // receiver unfolding map
    Vec2 offset;
    int order = 0;
  };
  const std::vector<Image>& images() const { return images_; }

 private:
  std::vector<Vec2> poly_;
  Vec2 src_;
  int max_order_;
  bool rect_ = false;
  double rx0_ = 0, ry0_ = 0, rw_ = 0, rh_ = 0;  // rectangle extents
  std::vector<Image> images_;  // general path (excludes the order-0 term)

  void build_general();
};

double image_source_field(const std::vector<Vec2>& polygon, Vec2 source, Vec2 r,
                          int max_order, const ImageSourceParams& p);

// Boundary of the union of a planar multi-domain: free edges chained into a
// CCW loop with collinear runs merged. Throws NonConvexDomain if the loop is
// not convex.
std::vector<Vec2> union_boundary_polygon(const MultiDomain& dom);

}  // namespace rayflow
