// rayflow: transport of high-frequency wave energy densities through
// polygonal multi-domains and triangulated shells.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rayflow/meshgen.hpp"
#include "rayflow/runner.hpp"

namespace fs = std::filesystem;
using namespace rayflow;

namespace {

ExecPolicy policy_from_threads(int threads) {
  return threads == 1 ? ExecPolicy::serial() : ExecPolicy::parallel(threads);
}

int run_cmd(const std::string& cfg_path, int threads, const std::string& out_override,
            const std::string& dump_override) {
  RunConfig cfg = load_config(cfg_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (!dump_override.empty()) cfg.dump_matrix_path = dump_override;
  fs::create_directories(cfg.out_dir);

  const BuiltModel model = build_model(cfg);
  std::vector<SamplePoint> pts = make_sample_points(cfg, model);
  const ExecPolicy exec = policy_from_threads(threads);
  const PipelineResult res = run_pipeline(cfg, model, pts, exec, cfg.dump_matrix_path);

  RunSummary summary;
  summary.dofs = res.dofs;
  summary.nnz = res.nnz;
  summary.t_assemble = res.t_assemble;
  summary.t_project = res.t_project;
  summary.t_solve = res.t_solve;
  summary.t_eval = res.t_eval;
  summary.solve = res.solve;
  summary.assembly = res.assembly;
  summary.eval = res.field.diag;

  const std::string field_path = (fs::path(cfg.out_dir) / "field.csv").string();
  write_field_csv(field_path, model, res.field, cfg.log10_column);
  summary.outputs.push_back(field_path);
  if (!cfg.dump_matrix_path.empty()) summary.outputs.push_back(cfg.dump_matrix_path);

  const std::string summary_path = (fs::path(cfg.out_dir) / "summary.txt").string();
  {
    std::ofstream out(summary_path);
    out << summary.to_text();
  }
  summary.outputs.push_back(summary_path);
  std::cout << summary.to_text();
  return 0;
}

int converge_cmd(const std::string& cfg_path, const std::string& sweep_text, int threads,
                 const std::string& out_override) {
  RunConfig cfg = load_config(cfg_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  fs::create_directories(cfg.out_dir);
  const SweepSpec sweep = parse_sweep(sweep_text);
  const auto rows = convergence_study(cfg, sweep, policy_from_threads(threads));
  const std::string path = (fs::path(cfg.out_dir) / "convergence.csv").string();
  write_convergence_csv(path, rows);
  std::cout << "level,error,eoc\n";
  for (const auto& row : rows) {
    std::cout << row.level << "," << row.error << ",";
    if (!std::isnan(row.eoc)) std::cout << row.eoc;
    std::cout << "\n";
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

int oracle_cmd(const std::string& cfg_path, int order, int threads,
               const std::string& out_override) {
  RunConfig cfg = load_config(cfg_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (order > 0) cfg.oracle_order = order;
  if (cfg.oracle.empty()) cfg.oracle = "image_source";
  fs::create_directories(cfg.out_dir);

  const BuiltModel model = build_model(cfg);
  const OracleComparison cmp = compare_oracle(cfg, model, policy_from_threads(threads));
  const std::string path = (fs::path(cfg.out_dir) / "oracle.csv").string();
  write_oracle_csv(path, model, cmp);
  std::cout << "mre = " << cmp.mre_all << "\n";
  std::cout << "mean_error = " << cmp.mean_error_all << "\n";
  for (std::size_t c = 0; c < cmp.cell_mean_error.size(); ++c)
    if (!std::isnan(cmp.cell_mean_error[c]))
      std::cout << "cell " << c << ": mean_error = " << cmp.cell_mean_error[c]
                << ", mre = " << cmp.cell_mre[c] << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int mesh_info_cmd(const std::string& mesh_path) {
  const TriMesh mesh = load_mesh(mesh_path);
  std::cout << "nodes = " << mesh.nodes.size() << "\n";
  std::cout << "tris = " << mesh.tris.size() << "\n";
  std::cout << "forced_free_edges = " << mesh.free_edges.size() << "\n";
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (const Vec3& p : mesh.nodes) {
    lo[0] = std::min(lo[0], p.x); hi[0] = std::max(hi[0], p.x);
    lo[1] = std::min(lo[1], p.y); hi[1] = std::max(hi[1], p.y);
    lo[2] = std::min(lo[2], p.z); hi[2] = std::max(hi[2], p.z);
  }
  std::cout << "bbox = [" << lo[0] << ", " << hi[0] << "] x [" << lo[1] << ", " << hi[1]
            << "] x [" << lo[2] << ", " << hi[2] << "]\n";
  const bool planar = std::abs(hi[2] - lo[2]) < 1e-12;
  const MultiDomain dom = planar ? planar_domain_from_mesh(mesh, 1.0, 0.0)
                                 : build_shell_multidomain(mesh, 1.0, 0.0);
  int shared = 0, free_cnt = 0;
  for (const auto& cell : dom.cells)
    for (const Edge& e : cell.edges)
      (e.neighbor.cell >= 0 ? shared : free_cnt) += 1;
  std::cout << "cells = " << dom.cells.size() << "\n";
  std::cout << "shared_edge_sides = " << shared << "\n";
  std::cout << "free_edges = " << free_cnt << "\n";
  std::cout << "conforming = yes\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"direction-preserving ray-density transport"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker count (1 = serial, 0 = all cores)");

  std::string cfg_path, out_dir, dump_path, sweep_text, mesh_path;
  int order = 0;

  auto* run = app.add_subcommand("run", "assemble, solve, and evaluate a config");
  run->fallthrough();
  run->add_option("config", cfg_path)->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--dump-matrix", dump_path, "binary transfer-matrix dump path");

  auto* conv = app.add_subcommand("converge", "error sweep against the config's oracle");
  conv->fallthrough();
  conv->add_option("config", cfg_path)->required();
  conv->add_option("--sweep", sweep_text, "L=8,16,... | h=0.4,... | grid=5,... | mesh=a,b")
      ->required();
  conv->add_option("--out", out_dir);

  auto* orc = app.add_subcommand("oracle", "compare the engine against the image source");
  orc->fallthrough();
  orc->add_option("config", cfg_path)->required();
  orc->add_option("--order", order, "maximum reflection order");
  orc->add_option("--out", out_dir);

  auto* mi = app.add_subcommand("mesh-info", "inspect a mesh file");
  mi->add_option("file", mesh_path)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return run_cmd(cfg_path, threads, out_dir, dump_path);
    if (conv->parsed()) return converge_cmd(cfg_path, sweep_text, threads, out_dir);
    if (orc->parsed()) return oracle_cmd(cfg_path, order, threads, out_dir);
    if (mi->parsed()) return mesh_info_cmd(mesh_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return (e.code() == Err::ConfigError || e.code() == Err::IoError ||
            e.code() == Err::NoOracle)
               ? 2
               : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
