#include "rayflow/solve.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace rayflow {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y = (I - B) x
void apply_system(const TransferMatrix& B, const std::vector<double>& x,
                  std::vector<double>& scratch, std::vector<double>& y, ExecPolicy exec) {
  B.matvec(x, scratch, exec);
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - scratch[i];
}

double true_residual(const TransferMatrix& B, const std::vector<double>& rho,
                     const std::vector<double>& rho0, ExecPolicy exec) {
  std::vector<double> t, r;
  apply_system(B, rho, t, r, exec);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - rho0[i];
    s += d * d;
  }
  const double b = norm2(rho0);
  return std::sqrt(s) / (b > 0.0 ? b : 1.0);
}

std::pair<DensityVector, int> solve_direct(const TransferMatrix& B,
                                           const DensityVector& rho0) {
  using Sp = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(B.nnz() + B.n);
  for (int c = 0; c < B.n; ++c) {
    trip.emplace_back(c, c, 1.0);
    for (std::int64_t k = B.col_ptr[c]; k < B.col_ptr[c + 1]; ++k)
      trip.emplace_back(B.row_idx[k], c, -B.val[k]);
  }
  Sp A(B.n, B.n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Sp> lu;
  lu.compute(A);
  require(lu.info() == Eigen::Success, Err::SingularSystem,
          "sparse LU factorization of (I - B) failed");
  Eigen::VectorXd b(B.n);
  for (int i = 0; i < B.n; ++i) b[i] = rho0[i];
  const Eigen::VectorXd x = lu.solve(b);
  DensityVector rho(B.n);
  for (int i = 0; i < B.n; ++i) rho[i] = x[i];
  return {std::move(rho), 0};
}

// BiCGStab on (I - B); touches B only through matvec.
std::pair<DensityVector, int> solve_bicgstab(const TransferMatrix& B,
                                             const DensityVector& rho0,
                                             const SolveOptions& opt, ExecPolicy exec) {
  const int n = B.n;
  DensityVector x(n, 0.0);
  std::vector<double> diag_inv;
  if (opt.diag_precondition) {
    diag_inv.assign(n, 1.0);
    for (int c = 0; c < n; ++c)
      for (std::int64_t k = B.col_ptr[c]; k < B.col_ptr[c + 1]; ++k)
        if (B.row_idx[k] == c) diag_inv[c] = 1.0 / (1.0 - B.val[k]);
  }
  const auto precond = [&](std::vector<double>& v) {
    if (diag_inv.empty()) return;
    for (int i = 0; i < n; ++i) v[i] *= diag_inv[i];
  };

  std::vector<double> r = rho0, scratch;
  const double bnorm = norm2(rho0);
  if (bnorm == 0.0) return {std::move(x), 0};
  std::vector<double> rhat = r, p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), z(n);
  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double rho_k = dot_v(rhat, r);
    if (rho_k == 0.0) fail(Err::NotConverged, "BiCGStab breakdown (rho = 0)");
    const double beta = (rho_k / rho_prev) * (alpha / omega);
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    y = p;
    precond(y);
    apply_system(B, y, scratch, v, exec);
    alpha = rho_k / dot_v(rhat, v);
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= opt.tol * bnorm) {
      for (int i = 0; i < n; ++i) x[i] += alpha * y[i];
      return {std::move(x), it};
    }
    z = s;
    precond(z);
    apply_system(B, z, scratch, t, exec);
    const double tt = dot_v(t, t);
    if (tt == 0.0) fail(Err::NotConverged, "BiCGStab breakdown (t = 0)");
    omega = dot_v(t, s) / tt;
    for (int i = 0; i < n; ++i) x[i] += alpha * y[i] + omega * z[i];
    for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    if (norm2(r) <= opt.tol * bnorm) return {std::move(x), it};
    rho_prev = rho_k;
  }
  fail(Err::NotConverged, "BiCGStab exceeded max_iter = " + std::to_string(opt.max_iter));
}

}  // namespace

std::pair<DensityVector, SolveReport> solve_stationary(const TransferMatrix& B,
                                                       const DensityVector& rho0,
                                                       const SolveOptions& opt,
                                                       ExecPolicy exec) {
  require(static_cast<int>(rho0.size()) == B.n, Err::LengthMismatch,
          "rho0 length does not match the matrix dimension");
  const auto start = std::chrono::steady_clock::now();
  SolveMethod method = opt.method;
  if (method == SolveMethod::Auto)
    method = (B.n < opt.direct_threshold) ? SolveMethod::Direct : SolveMethod::Iterative;

  std::pair<DensityVector, int> sol =
      (method == SolveMethod::Direct) ? solve_direct(B, rho0)
                                      : solve_bicgstab(B, rho0, opt, exec);

  SolveReport rep;
  rep.method = (method == SolveMethod::Direct) ? "direct" : "bicgstab";
  rep.iterations = sol.second;
  rep.residual = true_residual(B, sol.first, rho0, exec);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (double v : sol.first)
    require(std::isfinite(v), Err::SingularSystem, "non-finite solution entries");
  if (method == SolveMethod::Direct) {
    // A singular (I - B) can pass the LU yet fail the residual contract.
    require(rep.residual <= std::max(opt.tol, 1e-8), Err::SingularSystem,
            "direct solve residual " + std::to_string(rep.residual) +
                " exceeds tolerance; (I - B) is singular or near-singular");
  } else {
    require(rep.residual <= 10.0 * opt.tol, Err::NotConverged,
            "iterative residual " + std::to_string(rep.residual) + " above tolerance");
  }
  return {std::move(sol.first), rep};
}

DensityVector neumann_partial(const TransferMatrix& B, const DensityVector& rho0,
                              int n_terms, ExecPolicy exec) {
  require(n_terms >= 0, Err::OutOfRange, "n_terms must be nonnegative");
  DensityVector acc = rho0, term = rho0, next;
  for (int k = 1; k <= n_terms; ++k) {
    B.matvec(term, next, exec);
    term.swap(next);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += term[i];
  }
  return acc;
}

}  // namespace rayflow
