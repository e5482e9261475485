// Shared primitives: 2D/3D vectors, angle wrapping, error codes, execution policy.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rayflow {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Tangential directions are excluded from every local direction set; this
// guard bounds 1/cos(theta) in the reconstruction and path lengths in traces.
inline constexpr double kGrazeGuard = 1e-9;

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {x * a, y * a}; }
  Vec2 operator-() const { return {-x, -y}; }
  double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 normalized(Vec2 a) {
  const double n = a.norm();
  return {a.x / n, a.y / n};
}
// Counterclockwise quarter turn; maps an edge tangent to the inward normal of
// a CCW polygon.
inline Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double a) const { return {x * a, y * a, z * a}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 a) {
  const double n = a.norm();
  return {a.x / n, a.y / n, a.z / n};
}

// Wrap to (-pi, pi].
inline double wrap_pm_pi(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Wrap to [0, 2*pi).
inline double wrap_two_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

enum class Err {
  // geometry
  NonConvex,
  DegenerateEdge,
  ClockwiseOrder,
  NonConformingEdge,
  OrphanOverlap,
  OutOfRange,
  // directions
  TooFew,
  EmptyLocalSet,
  Grazing,
  NormalFlip,
  NotShared,
  // transfer
  NoHit,
  NegativeLength,
  // solve
  NotConverged,
  SingularSystem,
  // sources
  NoMatchingEdge,
  SourceOnBoundary,
  SourceNotVertex,
  // interior
  VertexHit,
  NotInCell,
  AtSource,
  // shell
  InsufficientNeighbors,
  RankDeficientFit,
  InvalidWavenumbers,
  MissingThreshold,
  // oracle
  ZeroDamping,
  NonConvexDomain,
  LengthMismatch,
  DegenerateDenominator,
  NonPositiveError,
  // cli
  ConfigError,
  NoOracle,
  IoError,
};

const char* err_name(Err code);

// Coefficient vector over the DOF layout (boundary densities, sources).
using DensityVector = std::vector<double>;

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Err code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

// threads == 1 selects the plain serial loops; anything else dispatches to the
// OpenMP kernels (0 = runtime default team size). Results are identical for
// every setting; parallel reductions are ordered.
struct ExecPolicy {
  int threads = 1;

  static ExecPolicy serial() { return {1}; }
  static ExecPolicy parallel(int n = 0) { return {n}; }
  bool is_serial() const { return threads == 1; }
  int team_size() const;
};

}  // namespace rayflow
