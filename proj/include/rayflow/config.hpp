// Run configuration: flat key-value text with [section] headers. Angles are
// written in units of pi (keys suffixed _pi).
#pragma once

#include <string>
#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/solve.hpp"

namespace rayflow {

struct SourceConfig {
  enum class Kind { Line, Point, ShellPoint };
  Kind kind = Kind::Line;
  // line
  Vec3 line_point;
  Vec3 line_dir{0, 1, 0};
  double theta0 = 0.0;  // radians
  double amplitude = 1.0;
  // point / shell point
  Vec3 position;
  double fluid_density = 1.0;
};

struct RunConfig {
  // geometry (exactly one of mesh / grid / polygons)
  std::string mesh_path;
  int unit_square_grid = 0;
  std::vector<std::vector<Vec2>> polygons;
  double match_tol = -1.0;

  // physics
  enum class Model { Helmholtz, Biharmonic };
  Model model = Model::Helmholtz;
  double c = 1.0;
  double eta_explicit = -1.0;
  double omega = 0.0;
  double mu = -1.0;               // explicit damping
  double hysteretic_loss = -1.0;  // mu = loss * k / 2
  double thickness = 0.0, youngs = 0.0, density = 0.0, poisson = 0.0;

  // discretization
  int L = 0;
  bool offset_directions = false;
  std::vector<double> custom_angles;  // radians
  double target_h = 1e12;             // one element per edge unless refined

  std::vector<SourceConfig> sources;

  // interfaces
  double reflect = 0.0;
  double transmit = 1.0;
  double free_reflect = 1.0;
  bool curvature_reflections = false;
  double ky_max = -1.0;
  double threshold_angle = -1.0;  // radians
  int rings = 2;

  SolveOptions solver;

  // output
  std::string points = "centroids";  // centroids | random:N | <file>
  std::string out_dir = "out";
  bool log10_column = false;
  std::string dump_matrix_path;

  // oracle selection for converge/oracle subcommands
  std::string oracle;  // parallel_wall | parallel_wall_ridge | image_source
  int oracle_order = -1;

  std::string source_path;  // config file, for error context
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& name);

}  // namespace rayflow
