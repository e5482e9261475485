#include "rayflow/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rayflow {

DofLayout::Dof DofLayout::unflat(int idx) const {
  const auto cit = std::upper_bound(cell_offset.begin(), cell_offset.end(), idx);
  const int cell = static_cast<int>(cit - cell_offset.begin()) - 1;
  const int rel = idx - cell_offset[cell];
  const auto eit = std::upper_bound(elem_offset[cell].begin(), elem_offset[cell].end(), rel);
  const int elem = static_cast<int>(eit - elem_offset[cell].begin()) - 1;
  return {cell, elem, rel - elem_offset[cell][elem]};
}

DofLayout build_dof_layout(const Discretization& disc, const DirectionTables& dirs) {
  DofLayout layout;
  const std::size_t ncell = disc.elems.size();
  layout.cell_offset.resize(ncell);
  layout.elem_offset.resize(ncell);
  layout.elem_ndirs.resize(ncell);
  int total = 0;
  for (std::size_t c = 0; c < ncell; ++c) {
    layout.cell_offset[c] = total;
    auto& off = layout.elem_offset[c];
    auto& nd = layout.elem_ndirs[c];
    off.resize(disc.elems[c].size());
    nd.resize(disc.elems[c].size());
    int rel = 0;
    for (std::size_t m = 0; m < disc.elems[c].size(); ++m) {
      off[m] = rel;
      nd[m] = dirs.maps[c][disc.elems[c][m].edge].size();
      rel += nd[m];
    }
    total += rel;
  }
  layout.total = total;
  return layout;
}

InterfaceRule::RT UniformRule::weights(const MultiDomain& dom, int cell, int edge,
                                       double /*global_angle*/, double /*theta_arr*/) const {
  for (const auto& [key, rt] : overrides_)
    if (key.first == cell && key.second == edge) return rt;
  if (dom.cells[cell].edges[edge].neighbor.cell < 0) return {free_reflect_, 0.0};
  return {reflect_, transmit_};
}

void UniformRule::set_override(int cell, int edge, RT rt) {
  overrides_.push_back({{cell, edge}, rt});
}

namespace {

// Non-throwing bin lookup; -1 marks a grazing outgoing branch.
int try_interval_index(const LocalDirectionMap& map, double theta) {
  if (std::abs(theta) >= kPi / 2.0 - kGrazeGuard) return -1;
  const auto it = std::lower_bound(map.breaks.begin(), map.breaks.end(), theta);
  return static_cast<int>(it - map.breaks.begin());
}

}  // namespace

RayHit trace_from(const SubDomain& dom, int src_edge, Vec2 origin, Vec2 dir) {
  int best_edge = -1;
  double best_t = std::numeric_limits<double>::infinity();
  double best_u = 0.0;
  for (int e = 0; e < static_cast<int>(dom.edges.size()); ++e) {
    if (e == src_edge) continue;
    const Edge& ed = dom.edges[e];
    const double den = dot(dir, ed.normal);
    if (den >= -1e-15) continue;  // receding from or parallel to the edge line
    const double t = dot(ed.a - origin, ed.normal) / den;
    if (t < 0.0) continue;
    const Vec2 hit = origin + dir * t;
    const double u = dot(hit - ed.a, ed.tangent);
    const double slack = 1e-9 * ed.len;
    if (u < -slack || u > ed.len + slack) continue;
    if (t < best_t) {
      best_t = t;
      best_edge = e;
      best_u = u;
    }
  }
  require(best_edge >= 0, Err::NoHit, "ray found no forward boundary intersection");

  // Half-open rule at vertices: a hit at an edge's far endpoint belongs to the
  // successor edge.
  const int ne = static_cast<int>(dom.edges.size());
  int e = best_edge;
  double u = std::max(best_u, 0.0);
  if (u >= dom.edges[e].len) {
    u -= dom.edges[e].len;
    e = (e + 1) % ne;
    u = std::max(u, 0.0);
  }
  double sv = dom.edges[e].s0 + u;
  if (sv >= dom.edges[e].s1) {  // summed coordinate rounded onto the seam
    e = (e + 1) % ne;
    sv = dom.edges[e].s0;
  }
  RayHit hit;
  hit.edge = e;
  hit.s = sv;
  hit.point = origin + dir * best_t;
  hit.dist = best_t;
  const Vec2 rd = -dir;
  hit.theta_arr = std::atan2(cross(rd, dom.edges[e].normal), dot(rd, dom.edges[e].normal));
  return hit;
}

RayHit trace_ray(const SubDomain& dom, double s, double theta) {
  require(std::abs(theta) < kPi / 2.0 - kGrazeGuard, Err::Grazing,
          "departure angle within the grazing guard");
  const int e = edge_at_arclength(dom, s);
  const Edge& ed = dom.edges[e];
  const Vec2 origin = ed.a + ed.tangent * (s - ed.s0);
  return trace_from(dom, e, origin, direction_from_local(theta, ed.normal));
}

double segment_integral(double D0, double beta, double s_lo, double s_hi, double mu) {
  require(s_hi >= s_lo, Err::NegativeLength, "segment has negative length");
  const double ds = s_hi - s_lo;
  if (mu == 0.0) return ds;
  const double x = mu * beta * ds;
  if (std::abs(x) < 1e-8) return ds * std::exp(-mu * D0) * (1.0 - 0.5 * x);
  return std::exp(-mu * D0) / (mu * beta) * (1.0 - std::exp(-x));
}

namespace {

struct ColumnScratch {
  std::vector<double> splits;
  std::vector<std::pair<int, double>> entries;
};

void assemble_column(const AssemblyInputs& in, int j, int me, int n,
                     const std::vector<Vec2>& target_pts, ColumnScratch& scratch,
                     std::vector<SparseEntry>& out, AssemblyDiagnostics& diag) {
  const MultiDomain& dom = *in.dom;
  const SubDomain& cell = dom.cells[j];
  const Discretization& disc = *in.disc;
  const BoundaryElement& src = disc.elems[j][me];
  const Edge& se = cell.edges[src.edge];
  const LocalDirectionMap& smap = in.dirs->at(j, src.edge);
  const double Phi = in.dirs->global.angles[smap.entries[n].global];
  const Vec2 dir{std::cos(Phi), std::sin(Phi)};
  const double cr = cross(se.tangent, dir);  // == cos(phi) > graze guard
  const double fwd_tol = 1e-12 * cell.diameter;

  // Sub-divide the element wherever a ray from it lands on a target element
  // boundary, so target element and outgoing bin are constant per segment and
  // the path length is affine.
  auto& splits = scratch.splits;
  splits.clear();
  for (const Vec2& v : target_pts) {
    const double s = src.s0 + cross(v - se.a, dir) / cr;
    if (s <= src.s0 || s >= src.s1) continue;
    const Vec2 p = se.a + se.tangent * (s - se.s0);
    if (dot(v - p, dir) <= fwd_tol) continue;
    splits.push_back(s);
  }
  std::sort(splits.begin(), splits.end());
  const double merge_tol = 1e-13 * src.len;
  splits.erase(std::unique(splits.begin(), splits.end(),
                           [&](double a, double b) { return b - a <= merge_tol; }),
               splits.end());
  diag.vertex_landings += static_cast<std::int64_t>(splits.size());

  auto& entries = scratch.entries;
  entries.clear();
  const double inv_sqrt_src = 1.0 / std::sqrt(src.len);
  double a = src.s0;
  for (std::size_t k = 0; k <= splits.size(); ++k) {
    const double b = (k < splits.size()) ? splits[k] : src.s1;
    if (b - a <= 1e-15 * src.len) {
      a = b;
      continue;
    }
    const double smid = 0.5 * (a + b);
    const Vec2 origin = se.a + se.tangent * (smid - se.s0);
    const RayHit hit = trace_from(cell, src.edge, origin, dir);
    const Edge& te = cell.edges[hit.edge];
    const double den = dot(dir, te.normal);
    const Vec2 pa = se.a + se.tangent * (a - se.s0);
    const double Da = dot(te.a - pa, te.normal) / den;
    const double beta = -dot(se.tangent, te.normal) / den;
    const double seg = segment_integral(Da, beta, a, b, cell.mu);

    const int mt = disc.element_at(j, hit.s);
    const auto rt = in.rule->weights(dom, j, hit.edge, Phi, hit.theta_arr);

    if (rt.reflect > 0.0) {
      const int nr = try_interval_index(in.dirs->at(j, hit.edge), -hit.theta_arr);
      if (nr < 0) {
        ++diag.grazing_dropped;
      } else {
        const double v = rt.reflect * seg * inv_sqrt_src / std::sqrt(disc.elems[j][mt].len);
        entries.push_back({in.layout->flat(j, mt, nr), v});
        ++diag.branches;
      }
    }
    const EdgeNeighbor nb = te.neighbor;
    if (rt.transmit > 0.0 && nb.cell >= 0) {
      // Shared grids coincide with reversed traversal; mirror the index.
      const int count = disc.edge_count[j][hit.edge];
      const int k_src = disc.elems[j][mt].index_in_edge;
      const int mt_nb = disc.edge_first[nb.cell][nb.edge] + (count - 1 - k_src);
      const int nt = try_interval_index(in.dirs->at(nb.cell, nb.edge), hit.theta_arr);
      if (nt < 0) {
        ++diag.grazing_dropped;
      } else {
        const double v = rt.transmit * seg * inv_sqrt_src /
                         std::sqrt(disc.elems[nb.cell][mt_nb].len);
        entries.push_back({in.layout->flat(nb.cell, mt_nb, nt), v});
        ++diag.branches;
      }
    }
    a = b;
  }

  std::sort(entries.begin(), entries.end());
  out.clear();
  for (const auto& [row, v] : entries) {
    if (!out.empty() && out.back().row == row)
      out.back().value += v;
    else
      out.push_back({row, v});
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const SparseEntry& e) { return std::abs(e.value) < 1e-300; }),
            out.end());
}

}  // namespace

ColumnBlock assemble_column_block(const AssemblyInputs& in, int cell_j,
                                  AssemblyDiagnostics* diag) {
  const MultiDomain& dom = *in.dom;
  const Discretization& disc = *in.disc;
  AssemblyDiagnostics local;

  // All element boundary positions of the cell as points; rays never re-cross
  // their own edge, so source-edge points drop out via the forward check.
  std::vector<Vec2> target_pts;
  const SubDomain& cell = dom.cells[cell_j];
  for (const BoundaryElement& be : disc.elems[cell_j]) {
    const Edge& ed = cell.edges[be.edge];
    target_pts.push_back(ed.a + ed.tangent * (be.s0 - ed.s0));
    if (be.index_in_edge == disc.edge_count[cell_j][be.edge] - 1)
      target_pts.push_back(ed.b);
  }

  ColumnBlock block;
  block.first_col = in.layout->cell_offset[cell_j];
  const std::size_t nelem = disc.elems[cell_j].size();
  ColumnScratch scratch;
  for (std::size_t me = 0; me < nelem; ++me) {
    const int ndir = in.layout->elem_ndirs[cell_j][me];
    for (int n = 0; n < ndir; ++n) {
      block.cols.emplace_back();
      assemble_column(in, cell_j, static_cast<int>(me), n, target_pts, scratch,
                      block.cols.back(), local);
    }
  }
  if (diag) {
    diag->branches += local.branches;
    diag->grazing_dropped += local.grazing_dropped;
    diag->vertex_landings += local.vertex_landings;
  }
  return block;
}

TransferMatrix assemble(const AssemblyInputs& in, ExecPolicy exec,
                        AssemblyDiagnostics* diag) {
  const int ncell = static_cast<int>(in.dom->cells.size());
  std::vector<ColumnBlock> blocks(ncell);
  std::vector<AssemblyDiagnostics> diags(ncell);

  if (exec.is_serial()) {
    for (int j = 0; j < ncell; ++j) blocks[j] = assemble_column_block(in, j, &diags[j]);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(exec.team_size())
#endif
    for (int j = 0; j < ncell; ++j) blocks[j] = assemble_column_block(in, j, &diags[j]);
  }

  if (diag) {
    for (const auto& d : diags) {
      diag->branches += d.branches;
      diag->grazing_dropped += d.grazing_dropped;
      diag->vertex_landings += d.vertex_landings;
    }
  }

  // Deterministic single-threaded merge in cell order.
  TransferMatrix B;
  B.n = in.layout->total;
  std::int64_t nnz = 0;
  for (const auto& blk : blocks)
    for (const auto& col : blk.cols) nnz += static_cast<std::int64_t>(col.size());
  B.col_ptr.assign(B.n + 1, 0);
  B.row_idx.reserve(nnz);
  B.val.reserve(nnz);
  int col = 0;
  for (const auto& blk : blocks) {
    for (const auto& entries : blk.cols) {
      B.col_ptr[col] = static_cast<std::int64_t>(B.row_idx.size());
      for (const auto& e : entries) {
        B.row_idx.push_back(e.row);
        B.val.push_back(e.value);
      }
      ++col;
    }
  }
  B.col_ptr[B.n] = static_cast<std::int64_t>(B.row_idx.size());

  // CSR mirror.
  B.row_ptr.assign(B.n + 1, 0);
  for (int r : B.row_idx) ++B.row_ptr[r + 1];
  for (int r = 0; r < B.n; ++r) B.row_ptr[r + 1] += B.row_ptr[r];
  B.col_idx.resize(B.row_idx.size());
  B.val_csr.resize(B.val.size());
  std::vector<std::int64_t> cursor(B.row_ptr.begin(), B.row_ptr.end() - 1);
  for (int c = 0; c < B.n; ++c) {
    for (std::int64_t k = B.col_ptr[c]; k < B.col_ptr[c + 1]; ++k) {
      const std::int64_t pos = cursor[B.row_idx[k]]++;
      B.col_idx[pos] = c;
      B.val_csr[pos] = B.val[k];
    }
  }
  return B;
}

void TransferMatrix::matvec(const std::vector<double>& x, std::vector<double>& y,
                            ExecPolicy exec) const {
  y.resize(n);
  if (exec.is_serial()) {
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        acc += val_csr[k] * x[col_idx[k]];
      y[r] = acc;
    }
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(exec.team_size())
#endif
  for (int r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      acc += val_csr[k] * x[col_idx[k]];
    y[r] = acc;
  }
}

void dump_matrix(const TransferMatrix& B, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Err::IoError, "cannot write " + path);
  const auto put_u64 = [&](std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
  };
  const auto put_f64 = [&](double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(v);
  };
  put_u64(static_cast<std::uint64_t>(B.n));
  put_u64(static_cast<std::uint64_t>(B.nnz()));
  for (int c = 0; c < B.n; ++c)
    for (std::int64_t k = B.col_ptr[c]; k < B.col_ptr[c + 1]; ++k) {
      put_u64(static_cast<std::uint64_t>(B.row_idx[k]));
      put_u64(static_cast<std::uint64_t>(c));
      put_f64(B.val[k]);
    }
}

TransferMatrix load_matrix_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Err::IoError, "cannot read " + path);
  const auto get_u64 = [&]() {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  };
  TransferMatrix B;
  B.n = static_cast<int>(get_u64());
  const std::uint64_t nnz = get_u64();
  B.col_ptr.assign(B.n + 1, 0);
  std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> trip(nnz);
  for (auto& t : trip) {
    const std::uint64_t r = get_u64();
    const std::uint64_t c = get_u64();
    const std::uint64_t v = get_u64();
    double d;
    std::memcpy(&d, &v, 8);
    t = {c, r, d};
  }
  require(in.good(), Err::IoError, "truncated matrix dump " + path);
  std::sort(trip.begin(), trip.end());
  for (const auto& [c, r, v] : trip) {
    ++B.col_ptr[c + 1];
    B.row_idx.push_back(static_cast<int>(r));
    B.val.push_back(v);
  }
  for (int c = 0; c < B.n; ++c) B.col_ptr[c + 1] += B.col_ptr[c];
  B.row_ptr.assign(B.n + 1, 0);
  for (int r : B.row_idx) ++B.row_ptr[r + 1];
  for (int r = 0; r < B.n; ++r) B.row_ptr[r + 1] += B.row_ptr[r];
  B.col_idx.resize(B.row_idx.size());
  B.val_csr.resize(B.val.size());
  std::vector<std::int64_t> cursor(B.row_ptr.begin(), B.row_ptr.end() - 1);
  for (int c = 0; c < B.n; ++c)
    for (std::int64_t k = B.col_ptr[c]; k < B.col_ptr[c + 1]; ++k) {
      const std::int64_t pos = cursor[B.row_idx[k]]++;
      B.col_idx[pos] = c;
      B.val_csr[pos] = B.val[k];
    }
  return B;
}

}  // namespace rayflow
