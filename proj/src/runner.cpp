#include "rayflow/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "rayflow/meshgen.hpp"
#include "rayflow/sources.hpp"

namespace rayflow {

namespace {

double now_between(const std::chrono::steady_clock::time_point& a,
                   const std::chrono::steady_clock::time_point& b) {
  return std::chrono::duration<double>(b - a).count();
}

bool mesh_is_planar(const TriMesh& mesh) {
  for (const Vec3& p : mesh.nodes)
    if (std::abs(p.z) > 1e-12) return false;
  return true;
}

}  // namespace

BuiltModel build_model(const RunConfig& cfg) {
  BuiltModel model;
  model.omega = cfg.omega;

  // Physics resolution.
  if (cfg.model == RunConfig::Model::Helmholtz) {
    model.alpha = 1.0;
    model.eta = cfg.eta_explicit > 0.0 ? cfg.eta_explicit : 1.0 / cfg.c;
    model.wavenumber = cfg.omega * model.eta;
  } else {
    model.alpha = 2.0;
    if (cfg.eta_explicit > 0.0) {
      model.eta = cfg.eta_explicit;
    } else {
      require(cfg.youngs > 0 && cfg.density > 0 && cfg.thickness > 0 && cfg.poisson > 0,
              Err::ConfigError,
              cfg.source_path + ": biharmonic model needs thickness/youngs/density/poisson");
      model.eta = bending_slowness(cfg.youngs, cfg.density, cfg.poisson, cfg.thickness);
    }
    require(cfg.omega > 0, Err::ConfigError,
            cfg.source_path + ": biharmonic model needs omega");
    model.wavenumber = model.eta * std::sqrt(cfg.omega);
  }
  if (cfg.mu >= 0.0) {
    model.mu = cfg.mu;
  } else if (cfg.hysteretic_loss > 0.0) {
    require(model.wavenumber > 0.0, Err::ConfigError,
            cfg.source_path + ": hysteretic damping needs omega and material data");
    model.mu = cfg.hysteretic_loss * model.wavenumber / 2.0;
  } else {
    model.mu = 0.0;
  }

  // Geometry.
  if (!cfg.mesh_path.empty()) {
    const TriMesh mesh = load_mesh(cfg.mesh_path);
    model.dom = mesh_is_planar(mesh) ? planar_domain_from_mesh(mesh, model.eta, model.mu)
                                     : build_shell_multidomain(mesh, model.eta, model.mu);
  } else if (cfg.unit_square_grid > 0) {
    model.dom = unit_square_grid(cfg.unit_square_grid, model.eta, model.mu);
  } else {
    std::vector<SubDomain> cells;
    for (const auto& poly : cfg.polygons)
      cells.push_back(build_polygon_domain(poly, model.eta, model.mu));
    model.dom = build_multidomain(std::move(cells), cfg.match_tol);
  }

  // Directions and elements.
  GlobalDirectionSet dirs;
  if (!cfg.custom_angles.empty())
    dirs = make_custom_directions(cfg.custom_angles);
  else
    dirs = cfg.offset_directions ? make_offset_directions(cfg.L)
                                 : make_global_directions(cfg.L);
  model.disc = build_discretization(model.dom, cfg.target_h);
  model.dirs = build_direction_tables(model.dom, std::move(dirs));
  model.layout = build_dof_layout(model.disc, model.dirs);

  // Interface rule.
  if (cfg.curvature_reflections) {
    require(model.dom.shell, Err::ConfigError,
            cfg.source_path + ": curvature reflections need a shell mesh geometry");
    model.curvature = estimate_curvature(model.dom, cfg.rings);
    ThresholdTable table;
    if (cfg.threshold_angle > 0.0)
      table = build_threshold_table_fixed(model.dom, *model.curvature, cfg.threshold_angle);
    else if (cfg.ky_max > 0.0)
      table = build_threshold_table(model.dom, *model.curvature, model.wavenumber,
                                    cfg.ky_max);
    else
      fail(Err::ConfigError,
           cfg.source_path + ": curvature reflections need ky_max or threshold_angle_pi");
    model.rule = std::make_unique<CurvatureRule>(*model.curvature, std::move(table),
                                                 cfg.free_reflect);
  } else {
    model.rule = std::make_unique<UniformRule>(cfg.reflect, cfg.transmit, cfg.free_reflect);
  }
  return model;
}

std::vector<SamplePoint> make_sample_points(const RunConfig& cfg, const BuiltModel& model) {
  const MultiDomain& dom = model.dom;
  std::vector<SamplePoint> pts;
  if (cfg.points == "centroids") {
    pts.reserve(dom.cells.size());
    for (const auto& cell : dom.cells) pts.push_back({cell.id, cell.centroid()});
    return pts;
  }
  if (cfg.points.rfind("random:", 0) == 0) {
    require(!dom.shell, Err::ConfigError, "random sample points need a planar domain");
    const int n = std::stoi(cfg.points.substr(7));
    require(n > 0, Err::ConfigError, "random:N needs N > 0");
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const auto& cell : dom.cells)
      for (const Vec2& v : cell.vertices) {
        lo_x = std::min(lo_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_x = std::max(hi_x, v.x);
        hi_y = std::max(hi_y, v.y);
      }
    std::mt19937_64 rng(0x5eed5eedull);
    std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
    const double margin = 1e-7 * dom.diameter;
    while (static_cast<int>(pts.size()) < n) {
      const Vec2 p{ux(rng), uy(rng)};
      for (const auto& cell : dom.cells) {
        if (!cell.contains(p)) continue;
        if (cell.boundary_distance(p) > margin) pts.push_back({cell.id, p});
        break;
      }
    }
    return pts;
  }
  // Point list file: lines "x y".
  require(!dom.shell, Err::ConfigError, "point files need a planar domain");
  std::ifstream in(cfg.points);
  require(in.good(), Err::ConfigError, "cannot open points file " + cfg.points);
  double x, y;
  while (in >> x >> y) {
    const int c = dom.locate_cell({x, y});
    require(c >= 0, Err::ConfigError, "sample point outside the domain in " + cfg.points);
    pts.push_back({c, {x, y}});
  }
  require(!pts.empty(), Err::ConfigError, "points file " + cfg.points + " is empty");
  return pts;
}

namespace {

DensityVector project_sources(const RunConfig& cfg, const BuiltModel& model) {
  DensityVector rho0(model.layout.total, 0.0);
  for (const SourceConfig& sc : cfg.sources) {
    DensityVector part;
    switch (sc.kind) {
      case SourceConfig::Kind::Line: {
        LineSource src{sc.line_point, sc.line_dir, sc.theta0, sc.amplitude};
        part = project_line_source(src, model.dom, model.disc, model.dirs, model.layout);
        break;
      }
      case SourceConfig::Kind::Point: {
        require(!model.dom.shell, Err::ConfigError,
                "acoustic point sources need a planar domain");
        AcousticPointSource src{{sc.position.x, sc.position.y}, model.omega,
                                sc.fluid_density};
        part = project_acoustic_point_source(src, model.dom, model.disc, model.dirs,
                                             model.layout, *model.rule);
        break;
      }
      case SourceConfig::Kind::ShellPoint: {
        ShellPointSource src{sc.position, model.omega, cfg.thickness, cfg.youngs,
                             cfg.density, cfg.poisson};
        part = project_shell_point_source(src, model.dom, model.disc, model.dirs,
                                          model.layout);
        break;
      }
    }
    for (std::size_t i = 0; i < rho0.size(); ++i) rho0[i] += part[i];
  }
  return rho0;
}

void add_direct_fields(const RunConfig& cfg, const BuiltModel& model, InteriorField& field) {
  for (const SourceConfig& sc : cfg.sources) {
    if (sc.kind == SourceConfig::Kind::Point) {
      const Vec2 r0{sc.position.x, sc.position.y};
      const int src_cell = model.dom.locate_cell(r0);
      AcousticPointSource src{r0, model.omega, sc.fluid_density};
      for (std::size_t i = 0; i < field.points.size(); ++i) {
        if (field.points[i].cell != src_cell) continue;
        field.values[i] +=
            direct_field(src, model.eta, model.mu, (field.points[i].pos - r0).norm());
      }
    } else if (sc.kind == SourceConfig::Kind::ShellPoint) {
      ShellPointSource src{sc.position, model.omega, cfg.thickness, cfg.youngs,
                           cfg.density, cfg.poisson};
      const std::vector<int> star = source_star_cells(src, model.dom);
      for (std::size_t i = 0; i < field.points.size(); ++i) {
        const SamplePoint& sp = field.points[i];
        if (std::find(star.begin(), star.end(), sp.cell) == star.end()) continue;
        const double d =
            (model.dom.cells[sp.cell].to_world(sp.pos) - sc.position).norm();
        field.values[i] += direct_field(src, model.mu, d);
      }
    }
  }
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, const BuiltModel& model,
                            std::vector<SamplePoint> points, ExecPolicy exec,
                            const std::string& dump_matrix_path) {
  PipelineResult res;
  const auto t0 = std::chrono::steady_clock::now();
  AssemblyInputs in{&model.dom, &model.disc, &model.dirs, &model.layout, model.rule.get()};
  const TransferMatrix B = assemble(in, exec, &res.assembly);
  const auto t1 = std::chrono::steady_clock::now();
  if (!dump_matrix_path.empty()) dump_matrix(B, dump_matrix_path);

  const DensityVector rho0 = project_sources(cfg, model);
  const auto t2 = std::chrono::steady_clock::now();

  auto [rho, report] = solve_stationary(B, rho0, cfg.solver, exec);
  const auto t3 = std::chrono::steady_clock::now();

  res.field = evaluate_interior(model.dom, model.disc, model.dirs, model.layout, rho,
                                std::move(points), model.alpha, exec);
  add_direct_fields(cfg, model, res.field);
  const auto t4 = std::chrono::steady_clock::now();

  res.solve = report;
  res.dofs = model.layout.total;
  res.nnz = B.nnz();
  res.t_assemble = now_between(t0, t1);
  res.t_project = now_between(t1, t2);
  res.t_solve = now_between(t2, t3);
  res.t_eval = now_between(t3, t4);
  return res;
}

namespace {

// x-coordinate entering the parallel-wall solution: the curvilinear arclength
// coordinate for ridge shells, the Cartesian x otherwise.
double wall_coordinate(const BuiltModel& model, const SamplePoint& sp, bool ridge) {
  const Vec3 w = model.dom.cells[sp.cell].to_world(sp.pos);
  return ridge ? ridge_arclength_of(w) : w.x;
}

}  // namespace

std::vector<double> oracle_values(const RunConfig& cfg, const BuiltModel& model,
                                  const std::vector<SamplePoint>& points, ExecPolicy exec) {
  if (cfg.oracle == "parallel_wall" || cfg.oracle == "parallel_wall_ridge") {
    const bool ridge = cfg.oracle == "parallel_wall_ridge";
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      out[i] = analytic_parallel_wall(wall_coordinate(model, points[i], ridge), model.mu);
    return out;
  }
  if (cfg.oracle == "image_source") {
    const SourceConfig* point_src = nullptr;
    for (const auto& sc : cfg.sources)
      if (sc.kind == SourceConfig::Kind::Point) point_src = &sc;
    require(point_src, Err::NoOracle, "image-source oracle needs an acoustic point source");
    int order = cfg.oracle_order;
    if (order <= 0) order = (model.mu >= 0.5) ? 32 : 400;
    const std::vector<Vec2> poly = union_boundary_polygon(model.dom);
    const Vec2 r0{point_src->position.x, point_src->position.y};
    const ImageSourceOracle oracle(poly, r0, order);
    ImageSourceParams p{model.omega, point_src->fluid_density, model.eta, model.mu};
    std::vector<Vec2> pts(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) pts[i] = points[i].pos;
    return oracle.field(pts, p, exec);
  }
  fail(Err::NoOracle, "config declares no usable oracle (oracle.kind)");
}

SweepSpec parse_sweep(const std::string& text) {
  SweepSpec spec;
  const std::size_t eq = text.find('=');
  require(eq != std::string::npos, Err::ConfigError,
          "sweep must look like L=8,16 h=0.4,0.2 grid=5,10 or mesh=a,b");
  const std::string kind = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  std::vector<std::string> toks;
  std::stringstream ss(rest);
  std::string tok;
  while (std::getline(ss, tok, ',')) toks.push_back(tok);
  require(!toks.empty(), Err::ConfigError, "sweep list is empty");
  if (kind == "L")
    spec.kind = SweepSpec::Kind::Directions;
  else if (kind == "h")
    spec.kind = SweepSpec::Kind::TargetH;
  else if (kind == "grid")
    spec.kind = SweepSpec::Kind::GridN;
  else if (kind == "mesh") {
    spec.kind = SweepSpec::Kind::MeshFiles;
    spec.meshes = toks;
    return spec;
  } else
    fail(Err::ConfigError, "unknown sweep kind '" + kind + "'");
  for (const std::string& t : toks) spec.values.push_back(std::stod(t));
  return spec;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, const SweepSpec& sweep,
                                              ExecPolicy exec) {
  require(!cfg.oracle.empty(), Err::NoOracle, "convergence study needs an oracle");
  const std::size_t levels =
      sweep.kind == SweepSpec::Kind::MeshFiles ? sweep.meshes.size() : sweep.values.size();
  std::vector<ConvergenceRow> rows;
  std::vector<double> errors;
  for (std::size_t k = 0; k < levels; ++k) {
    RunConfig level_cfg = cfg;
    ConvergenceRow row;
    switch (sweep.kind) {
      case SweepSpec::Kind::Directions:
        level_cfg.L = static_cast<int>(sweep.values[k]);
        row.level = "L=" + std::to_string(level_cfg.L);
        break;
      case SweepSpec::Kind::TargetH:
        level_cfg.target_h = sweep.values[k];
        row.level = "h=" + std::to_string(sweep.values[k]);
        break;
      case SweepSpec::Kind::GridN:
        level_cfg.unit_square_grid = static_cast<int>(sweep.values[k]);
        level_cfg.mesh_path.clear();
        level_cfg.polygons.clear();
        row.level = "grid=" + std::to_string(level_cfg.unit_square_grid);
        break;
      case SweepSpec::Kind::MeshFiles:
        level_cfg.mesh_path = sweep.meshes[k];
        level_cfg.unit_square_grid = 0;
        level_cfg.polygons.clear();
        row.level = sweep.meshes[k];
        break;
    }
    const BuiltModel model = build_model(level_cfg);
    const std::vector<SamplePoint> pts = make_sample_points(level_cfg, model);
    const PipelineResult res = run_pipeline(level_cfg, model, pts, exec);
    const std::vector<double> exact = oracle_values(level_cfg, model, pts, exec);
    row.error = mre(res.field.values, exact);
    errors.push_back(row.error);
    if (errors.size() >= 2)
      row.eoc = std::log2(errors[errors.size() - 2] / errors.back());
    rows.push_back(row);
  }
  return rows;
}

OracleComparison compare_oracle(const RunConfig& cfg, const BuiltModel& model,
                                ExecPolicy exec) {
  OracleComparison cmp;
  cmp.points = make_sample_points(cfg, model);
  const PipelineResult res = run_pipeline(cfg, model, cmp.points, exec,
                                          cfg.dump_matrix_path);
  cmp.engine = res.field.values;
  cmp.exact = oracle_values(cfg, model, cmp.points, exec);
  cmp.mre_all = mre(cmp.engine, cmp.exact);
  cmp.mean_error_all = mean_error(cmp.engine, cmp.exact);

  const std::size_t ncell = model.dom.cells.size();
  cmp.cell_mean_error.assign(ncell, std::numeric_limits<double>::quiet_NaN());
  cmp.cell_mre.assign(ncell, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < ncell; ++c) {
    std::vector<double> eng, exa;
    for (std::size_t i = 0; i < cmp.points.size(); ++i)
      if (cmp.points[i].cell == static_cast<int>(c)) {
        eng.push_back(cmp.engine[i]);
        exa.push_back(cmp.exact[i]);
      }
    if (eng.empty()) continue;
    cmp.cell_mean_error[c] = mean_error(eng, exa);
    cmp.cell_mre[c] = mre(eng, exa);
  }
  return cmp;
}

void write_field_csv(const std::string& path, const BuiltModel& model,
                     const InteriorField& field, bool log10_column) {
  std::ofstream out(path);
  require(out.good(), Err::IoError, "cannot write " + path);
  out << "cell,x,y,z,value";
  if (log10_column) out << ",log10";
  out << "\n";
  char buf[512];
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const SamplePoint& sp = field.points[i];
    const Vec3 w = model.dom.cells[sp.cell].to_world(sp.pos);
    const double v = field.values[i];
    if (log10_column)
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", sp.cell, w.x,
                    w.y, w.z, v, std::log10(v));
    else
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", sp.cell, w.x, w.y,
                    w.z, v);
    out << buf;
  }
}

void write_oracle_csv(const std::string& path, const BuiltModel& model,
                      const OracleComparison& cmp) {
  std::ofstream out(path);
  require(out.good(), Err::IoError, "cannot write " + path);
  out << "cell,x,y,z,engine,oracle\n";
  char buf[512];
  for (std::size_t i = 0; i < cmp.points.size(); ++i) {
    const SamplePoint& sp = cmp.points[i];
    const Vec3 w = model.dom.cells[sp.cell].to_world(sp.pos);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", sp.cell, w.x, w.y,
                  w.z, cmp.engine[i], cmp.exact[i]);
    out << buf;
  }
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  require(out.good(), Err::IoError, "cannot write " + path);
  out << "level,error,eoc\n";
  char buf[256];
  for (const auto& row : rows) {
    if (std::isnan(row.eoc))
      std::snprintf(buf, sizeof buf, "%s,%.17g,\n", row.level.c_str(), row.error);
    else
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.6g\n", row.level.c_str(), row.error,
                    row.eoc);
    out << buf;
  }
}

std::string RunSummary::to_text() const {
  std::ostringstream os;
  os << "dofs = " << dofs << "\n";
  os << "nnz = " << nnz << "\n";
  os << "assemble_seconds = " << t_assemble << "\n";
  os << "project_seconds = " << t_project << "\n";
  os << "solve_seconds = " << t_solve << "\n";
  os << "evaluate_seconds = " << t_eval << "\n";
  os << "solve_method = " << solve.method << "\n";
  os << "solve_iterations = " << solve.iterations << "\n";
  os << "solve_residual = " << solve.residual << "\n";
  os << "assembly_branches = " << assembly.branches << "\n";
  os << "assembly_grazing_dropped = " << assembly.grazing_dropped << "\n";
  os << "assembly_vertex_landings = " << assembly.vertex_landings << "\n";
  os << "eval_terms = " << eval.terms << "\n";
  os << "eval_grazing_skipped = " << eval.grazing_skipped << "\n";
  os << "eval_vertex_hits = " << eval.vertex_hits << "\n";
  for (const auto& o : outputs) os << "output = " << o << "\n";
  return os.str();
}

}  // namespace rayflow
