#include "rayflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rayflow {

double analytic_parallel_wall(double x, double mu) {
  require(mu > 0.0, Err::ZeroDamping, "parallel-wall series diverges at mu = 0");
  return (std::exp(-mu * x) + std::exp(-mu * (2.0 - x))) / (1.0 - std::exp(-2.0 * mu));
}

double mre(std::span<const double> approx, std::span<const double> exact) {
  require(approx.size() == exact.size(), Err::LengthMismatch, "value lists differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    num += std::abs(approx[i] - exact[i]);
    den += exact[i];
  }
  require(den > 0.0, Err::DegenerateDenominator, "exact values sum to zero");
  return num / den;
}

double mean_error(std::span<const double> approx, std::span<const double> exact) {
  require(approx.size() == exact.size(), Err::LengthMismatch, "value lists differ in length");
  double sa = 0.0, se = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    sa += approx[i];
    se += exact[i];
  }
  require(se > 0.0, Err::DegenerateDenominator, "exact values sum to zero");
  return std::abs(sa - se) / se;
}

std::vector<double> eoc(std::span<const double> errors) {
  require(errors.size() >= 2, Err::LengthMismatch, "need at least two error levels");
  for (double e : errors)
    require(e > 0.0, Err::NonPositiveError, "errors must be positive");
  std::vector<double> out;
  out.reserve(errors.size() - 1);
  for (std::size_t k = 1; k < errors.size(); ++k)
    out.push_back(std::log2(errors[k - 1] / errors[k]));
  return out;
}

namespace {

double amplitude(double d, const ImageSourceParams& p) {
  return p.fluid_density * p.omega * p.eta * std::exp(-p.mu * d) / (8.0 * kPi * d);
}

struct AngularInterval {
  double a0 = 0.0;   // start direction
  double width = 0.0;

  bool contains(double theta) const { return wrap_two_pi(theta - a0) < width; }
};

// Arc subtended by segment [p, q] seen from src; width < pi for segments not
// through src.
bool subtend(Vec2 src, Vec2 p, Vec2 q, AngularInterval& out) {
  const double tp = std::atan2(p.y - src.y, p.x - src.x);
  const double tq = std::atan2(q.y - src.y, q.x - src.x);
  const double d = wrap_pm_pi(tq - tp);
  if (std::abs(d) < 1e-14) return false;
  if (d > 0) {
    out = {tp, d};
  } else {
    out = {tq, -d};
  }
  return true;
}

bool intersect(const AngularInterval& a, const AngularInterval& b, AngularInterval& out) {
  double off = wrap_two_pi(b.a0 - a.a0);
  for (double o : {off, off - kTwoPi}) {
    const double lo = std::max(0.0, o);
    const double hi = std::min(a.width, o + b.width);
    if (hi - lo > 1e-14) {
      out = {a.a0 + lo, hi - lo};
      return true;
    }
  }
  return false;
}

struct Reflector {
  // Affine involution across an edge line: x -> m (x - a) + a.
  double mxx, mxy, myx, myy;
  Vec2 a;

  Vec2 apply(Vec2 p) const {
    const Vec2 d = p - a;
    return {a.x + mxx * d.x + mxy * d.y, a.y + myx * d.x + myy * d.y};
  }
};

Reflector edge_reflector(Vec2 a, Vec2 b) {
  const Vec2 t = normalized(b - a);
  return {t.x * t.x - t.y * t.y, 2.0 * t.x * t.y, 2.0 * t.x * t.y,
          t.y * t.y - t.x * t.x, a};
}

}  // namespace

ImageSourceOracle::ImageSourceOracle(std::vector<Vec2> polygon, Vec2 source, int max_order)
    : poly_(std::move(polygon)), src_(source), max_order_(max_order) {
  require(poly_.size() >= 3, Err::NonConvexDomain, "polygon needs at least 3 vertices");
  const std::size_t n = poly_.size();
  double diam = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) diam = std::max(diam, (poly_[i] - poly_[j]).norm());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 u = poly_[(i + 1) % n] - poly_[i];
    const Vec2 v = poly_[(i + 2) % n] - poly_[(i + 1) % n];
    require(cross(u, v) > 0.0, Err::NonConvexDomain, "polygon is not convex CCW");
  }

  if (n == 4) {
    bool axis = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const Vec2 d = poly_[(i + 1) % 4] - poly_[i];
      if (std::abs(d.x) > 1e-12 * diam && std::abs(d.y) > 1e-12 * diam) axis = false;
    }
    if (axis) {
      rect_ = true;
      rx0_ = std::min({poly_[0].x, poly_[1].x, poly_[2].x, poly_[3].x});
      ry0_ = std::min({poly_[0].y, poly_[1].y, poly_[2].y, poly_[3].y});
      rw_ = std::max({poly_[0].x, poly_[1].x, poly_[2].x, poly_[3].x}) - rx0_;
      rh_ = std::max({poly_[0].y, poly_[1].y, poly_[2].y, poly_[3].y}) - ry0_;
      return;
    }
  }
  build_general();
}

void ImageSourceOracle::build_general() {
  struct Node {
    Image img;
    int last_edge;
  };
  const std::size_t n = poly_.size();
  std::vector<Reflector> refl(n);
  for (std::size_t e = 0; e < n; ++e)
    refl[e] = edge_reflector(poly_[e], poly_[(e + 1) % n]);

  std::vector<Node> level;
  for (std::size_t e = 0; e < n; ++e) {
    AngularInterval beam;
    if (!subtend(src_, poly_[e], poly_[(e + 1) % n], beam)) continue;
    Node node;
    node.last_edge = static_cast<int>(e);
    node.img.order = 1;
    node.img.a0 = beam.a0;
    node.img.width = beam.width;
    const Reflector& R = refl[e];
    node.img.mxx = R.mxx;
    node.img.mxy = R.mxy;
    node.img.myx = R.myx;
    node.img.myy = R.myy;
    node.img.offset = R.apply({0, 0});
    node.img.pos = R.apply(src_);
    level.push_back(node);
  }

  const auto apply_map = [](const Image& im, Vec2 p) {
    return Vec2{im.mxx * p.x + im.mxy * p.y + im.offset.x,
                im.myx * p.x + im.myy * p.y + im.offset.y};
  };
  const auto apply_linear = [](const Image& im, Vec2 v) {
    return Vec2{im.mxx * v.x + im.mxy * v.y, im.myx * v.x + im.myy * v.y};
  };

  for (auto& nd : level) images_.push_back(nd.img);
  for (int order = 2; order <= max_order_ && !level.empty(); ++order) {
    std::vector<Node> next;
    for (const Node& nd : level) {
      for (std::size_t e = 0; e < n; ++e) {
        if (static_cast<int>(e) == nd.last_edge) continue;
        // Child window: this edge unfolded by the parent map.
        const Vec2 wa = apply_map(nd.img, poly_[e]);
        const Vec2 wb = apply_map(nd.img, poly_[(e + 1) % n]);
        AngularInterval warc;
        if (!subtend(src_, wa, wb, warc)) continue;
        AngularInterval beam;
        if (!intersect({nd.img.a0, nd.img.width}, warc, beam)) continue;

        Node child;
        child.last_edge = static_cast<int>(e);
        child.img.order = order;
        child.img.a0 = beam.a0;
        child.img.width = beam.width;
        // M_child = M_parent o R_e (deepest reflection applied first).
        const Reflector& R = refl[e];
        const Vec2 col_x = apply_linear(nd.img, {R.mxx, R.myx});
        const Vec2 col_y = apply_linear(nd.img, {R.mxy, R.myy});
        child.img.mxx = col_x.x;
        child.img.myx = col_x.y;
        child.img.mxy = col_y.x;
        child.img.myy = col_y.y;
        child.img.offset = apply_map(nd.img, R.apply({0, 0}));
        child.img.pos = R.apply(nd.img.pos);
        next.push_back(child);
      }
    }
    for (auto& nd : next) images_.push_back(nd.img);
    level = std::move(next);
  }
}

std::int64_t ImageSourceOracle::image_count() const {
  if (!rect_) return static_cast<std::int64_t>(images_.size());
  std::int64_t c = 0;
  for (int kx = -max_order_; kx <= max_order_; ++kx)
    c += std::max(0, 2 * (max_order_ - std::abs(kx)) + 1);
  return c - 1;  // excludes the order-0 term
}

std::vector<Vec2> ImageSourceOracle::axis_images_x() const {
  require(rect_, Err::OutOfRange, "axis image list is defined for rectangles");
  std::vector<Vec2> out;
  const double xi = src_.x - rx0_;
  for (int k = -max_order_; k <= max_order_; ++k) {
    const double fold = (k % 2 == 0) ? xi : rw_ - xi;
    out.push_back({rx0_ + k * rw_ + fold, src_.y});
  }
  return out;
}

double ImageSourceOracle::field(Vec2 r, const ImageSourceParams& p) const {
  double acc = amplitude((r - src_).norm(), p);
  if (rect_) {
    const double xi = r.x - rx0_, yi = r.y - ry0_;
    for (int kx = -max_order_; kx <= max_order_; ++kx) {
      const int rem = max_order_ - std::abs(kx);
      const double qx = rx0_ + kx * rw_ + ((kx % 2 == 0) ? xi : rw_ - xi);
      for (int ky = -rem; ky <= rem; ++ky) {
        if (kx == 0 && ky == 0) continue;
        const double qy = ry0_ + ky * rh_ + ((ky % 2 == 0) ? yi : rh_ - yi);
        acc += amplitude(std::hypot(qx - src_.x, qy - src_.y), p);
      }
    }
    return acc;
  }
  for (const Image& im : images_) {
    const Vec2 q{im.mxx * r.x + im.mxy * r.y + im.offset.x,
                 im.myx * r.x + im.myy * r.y + im.offset.y};
    const double theta = std::atan2(q.y - src_.y, q.x - src_.x);
    if (wrap_two_pi(theta - im.a0) < im.width) acc += amplitude((q - src_).norm(), p);
  }
  return acc;
}

std::vector<double> ImageSourceOracle::field(const std::vector<Vec2>& pts,
                                             const ImageSourceParams& p,
                                             ExecPolicy exec) const {
  std::vector<double> out(pts.size());
  const int n = static_cast<int>(pts.size());
  if (exec.is_serial()) {
    for (int i = 0; i < n; ++i) out[i] = field(pts[i], p);
    return out;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(exec.team_size())
#endif
  for (int i = 0; i < n; ++i) out[i] = field(pts[i], p);
  return out;
}

double image_source_field(const std::vector<Vec2>& polygon, Vec2 source, Vec2 r,
                          int max_order, const ImageSourceParams& p) {
  return ImageSourceOracle(polygon, source, max_order).field(r, p);
}

std::vector<Vec2> union_boundary_polygon(const MultiDomain& dom) {
  require(!dom.shell, Err::NonConvexDomain,
          "union boundary is defined for planar multi-domains");
  // Chain free edges by shared endpoints.
  struct FreeEdge {
    Vec2 a, b;
  };
  std::vector<FreeEdge> edges;
  for (const auto& cell : dom.cells)
    for (const Edge& e : cell.edges)
      if (e.neighbor.cell < 0) edges.push_back({e.a, e.b});
  require(!edges.empty(), Err::NonConvexDomain, "domain has no free boundary");

  const double tol = 1e-9 * std::max(dom.diameter, 1e-300);
  const auto same = [&](Vec2 p, Vec2 q) { return (p - q).norm() <= tol; };

  std::vector<char> used(edges.size(), 0);
  std::vector<Vec2> loop;
  loop.push_back(edges[0].a);
  Vec2 cur = edges[0].b;
  used[0] = 1;
  for (std::size_t step = 1; step < edges.size(); ++step) {
    bool found = false;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (used[i]) continue;
      if (same(edges[i].a, cur)) {
        loop.push_back(edges[i].a);
        cur = edges[i].b;
        used[i] = 1;
        found = true;
        break;
      }
    }
    require(found, Err::NonConvexDomain, "free boundary does not form a single loop");
  }
  require(same(cur, loop.front()), Err::NonConvexDomain, "free boundary loop is open");

  // Merge collinear runs.
  std::vector<Vec2> poly;
  const std::size_t m = loop.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 prev = loop[(i + m - 1) % m];
    const Vec2 here = loop[i];
    const Vec2 next = loop[(i + 1) % m];
    if (std::abs(cross(here - prev, next - here)) > tol * dom.diameter)
      poly.push_back(here);
  }
  require(poly.size() >= 3, Err::NonConvexDomain, "degenerate union boundary");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 u = poly[(i + 1) % poly.size()] - poly[i];
    const Vec2 v = poly[(i + 2) % poly.size()] - poly[(i + 1) % poly.size()];
    require(cross(u, v) > 0.0, Err::NonConvexDomain, "union boundary is not convex");
  }
  return poly;
}

}  // namespace rayflow
