// Stationary-density solves of (I - B) rho = rho0.
#pragma once

#include <string>
#include <vector>

#include "rayflow/common.hpp"
#include "rayflow/transfer.hpp"

namespace rayflow {

enum class SolveMethod { Auto, Direct, Iterative };

struct SolveOptions {
  SolveMethod method = SolveMethod::Auto;
  double tol = 1e-10;
  int max_iter = 2000;
  bool diag_precondition = false;
  // Auto picks the sparse LU below this many DOFs, BiCGStab above.
  int direct_threshold = 50000;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  double residual = 0.0;  // ||(I-B) rho - rho0||_2 / ||rho0||_2
  double seconds = 0.0;
};

std::pair<DensityVector, SolveReport> solve_stationary(const TransferMatrix& B,
                                                       const DensityVector& rho0,
                                                       const SolveOptions& opt,
                                                       ExecPolicy exec);

// Partial Neumann sum  sum_{k=0..n} B^k rho0  (reflection-order diagnostic).
DensityVector neumann_partial(const TransferMatrix& B, const DensityVector& rho0,
                              int n_terms, ExecPolicy exec);

}  // namespace rayflow
