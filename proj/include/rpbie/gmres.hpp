#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rpbie/types.hpp"

namespace rpbie {

struct GmresParams {
  double tol = 1e-10;
  std::size_t restart = 100;
  std::size_t maxiter = 1000;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  ///< relative residual after each iteration
  double final_residual = 0.0;           ///< true ||b - A x|| / ||b|| at exit
  double wall_seconds = 0.0;
  bool converged = false;
  bool breakdown = false;
  /// max |<q_i, q_j> - delta_ij| seen in any Arnoldi cycle.
  double max_orthogonality_loss = 0.0;
};

using LinearMap = std::function<std::vector<cplx>(std::span<const cplx>)>;

/// Restarted GMRES from a zero initial guess. Modified Gram–Schmidt applied
/// twice per Arnoldi step, Givens rotations for the small least-squares
/// problem. Throws NumericalError when the operator produces NaN/Inf.
std::vector<cplx> gmres(const LinearMap& apply, std::span<const cplx> b, const GmresParams& params,
                        SolveReport& report);

}  // namespace rpbie
