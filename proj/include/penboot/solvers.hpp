#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "penboot/model.hpp"

// Penalized least-squares solvers.  All families reduce to cyclic coordinate
// descent with exact univariate updates: soft thresholding for the weighted
// l1 families, closed-form region minimization for SCAD/MCP.  Fits are
// deterministic: cyclic coordinate order, warm start at zero.

namespace penboot {

struct SolverConfig {
  int max_iters = 10000;      // full sweeps
  double coord_tol = 1e-10;   // max coordinate change per sweep
  double kkt_tol = 1e-8;      // stationarity residual for convex families
  double zero_tol = 1e-10;    // active-set membership
};

// Thrown when coordinate descent exhausts max_iters; carries the last
// iterate and its stationarity residual so callers can diagnose.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, VectorXd beta, double kkt)
      : std::runtime_error(msg), last_beta(std::move(beta)), kkt(kkt) {}
  VectorXd last_beta;
  double kkt;
};

// Least squares on the given support (all coordinates when absent), zeros
// elsewhere.  Rejects a singular Gram block, naming its smallest eigenvalue.
Fit fit_ols(const RegressionProblem& problem,
            const std::optional<std::vector<int>>& support = std::nullopt);

// The initial estimate used by the adaptive lasso and one-step families.
VectorXd initial_estimate(const RegressionProblem& problem, const InitialEstimator& init,
                          const SolverConfig& config = {});

// Fits the requested family.  Weighted l1 families satisfy
// kkt_residual <= config.kkt_tol on return; SCAD/MCP return a
// coordinate-wise stationary point.  Post-selection OLS runs the lasso at
// the selector lambda and refits by least squares on the selected support.
//
// SCAD/MCP updates require every normalized Gram diagonal to exceed 1/a;
// otherwise the whole fit falls back to the one-step surrogate (local
// linear approximation at the OLS estimate) and marks Fit::lla_fallback.
//
// Weighted families with a lasso initial may receive exactly-zero initial
// coefficients; where the implied weight is infinite the coordinate is
// pinned to zero for the whole fit.  An OLS initial with |initial_j| < 1e-8
// under the adaptive lasso is rejected with guidance to use a lasso initial
// instead, since the near-infinite weight is then numerical accident rather
// than structural selection.
Fit fit_penalized(const RegressionProblem& problem, const PenaltySpec& spec,
                  const SolverConfig& config = {});

// Max stationarity violation of beta for a weighted-l1 representation of
// the family: for nonzero coordinates |gradient + weight * sign|, for zero
// coordinates (|gradient| - weight)_+, with SCAD/MCP linearized at beta.
// The initial estimate is recomputed from the problem when the family needs
// one and none is supplied.
double kkt_residual(const RegressionProblem& problem, const PenaltySpec& spec,
                    const VectorXd& beta,
                    std::optional<VectorXd> initial_beta = std::nullopt);

// Objective value sum_i (y_i - x_i'beta)^2 + total penalty; used by the
// monotonicity checks and by bootstrap diagnostics.
double penalized_objective(const RegressionProblem& problem, const PenaltySpec& spec,
                           const VectorXd& beta,
                           std::optional<VectorXd> initial_beta = std::nullopt);

// max_j |(C21 C11^{-1} s)_j| over the inactive block, the quantity compared
// to 1 - eta in the sign-consistency condition for the lasso.
double check_irrepresentable(const RegressionProblem& problem,
                             const std::vector<int>& true_active,
                             const VectorXd& true_signs);

// Weighted l1 fit with explicit total per-coordinate weights; infinite
// weights pin coordinates to zero.  Exposed for the bootstrap refits and
// the solver tests.
Fit fit_weighted_l1(const RegressionProblem& problem, const VectorXd& total_weights,
                    const SolverConfig& config = {});

} // namespace penboot
