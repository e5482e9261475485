// Pipeline orchestration shared by the CLI and the test suites:
// build -> assemble -> solve -> evaluate, convergence sweeps, and oracle runs.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rayflow/config.hpp"
#include "rayflow/interior.hpp"
#include "rayflow/oracle.hpp"
#include "rayflow/shell.hpp"

namespace rayflow {

struct BuiltModel {
  MultiDomain dom;
  Discretization disc;
  DirectionTables dirs;
  DofLayout layout;
  std::unique_ptr<InterfaceRule> rule;
  std::optional<CurvatureData> curvature;
  double alpha = 1.0;
  double eta = 1.0;
  double mu = 0.0;
  double omega = 0.0;
  double wavenumber = 0.0;
};

BuiltModel build_model(const RunConfig& cfg);

std::vector<SamplePoint> make_sample_points(const RunConfig& cfg, const BuiltModel& model);

struct PipelineResult {
  InteriorField field;  // direct source field included
  SolveReport solve;
  AssemblyDiagnostics assembly;
  std::int64_t dofs = 0;
  std::int64_t nnz = 0;
  double t_assemble = 0.0, t_project = 0.0, t_solve = 0.0, t_eval = 0.0;
};

PipelineResult run_pipeline(const RunConfig& cfg, const BuiltModel& model,
                            std::vector<SamplePoint> points, ExecPolicy exec,
                            const std::string& dump_matrix_path = "");

// Per-point reference values for the configured oracle; image-source order
// picks the config override, then the damping-based default (32 for strong
// damping, 400 below mu = 0.5).
std::vector<double> oracle_values(const RunConfig& cfg, const BuiltModel& model,
                                  const std::vector<SamplePoint>& points, ExecPolicy exec);

struct SweepSpec {
  enum class Kind { Directions, TargetH, GridN, MeshFiles };
  Kind kind = Kind::Directions;
  std::vector<double> values;
  std::vector<std::string> meshes;
};
SweepSpec parse_sweep(const std::string& text);

struct ConvergenceRow {
  std::string level;
  double error = 0.0;
  double eoc = std::numeric_limits<double>::quiet_NaN();
};
std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, const SweepSpec& sweep,
                                              ExecPolicy exec);

struct OracleComparison {
  std::vector<SamplePoint> points;
  std::vector<double> engine;
  std::vector<double> exact;
  double mre_all = 0.0;
  double mean_error_all = 0.0;
  std::vector<double> cell_mean_error;  // indexed by cell id; NaN if no points
  std::vector<double> cell_mre;
};
OracleComparison compare_oracle(const RunConfig& cfg, const BuiltModel& model,
                                ExecPolicy exec);

void write_field_csv(const std::string& path, const BuiltModel& model,
                     const InteriorField& field, bool log10_column);
void write_oracle_csv(const std::string& path, const BuiltModel& model,
                      const OracleComparison& cmp);
void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows);

struct RunSummary {
  std::int64_t dofs = 0, nnz = 0;
  double t_assemble = 0, t_project = 0, t_solve = 0, t_eval = 0;
  SolveReport solve;
  AssemblyDiagnostics assembly;
  EvalDiagnostics eval;
  std::vector<std::string> outputs;

  std::string to_text() const;
};

}  // namespace rayflow
