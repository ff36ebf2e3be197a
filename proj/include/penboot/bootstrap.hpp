#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "penboot/model.hpp"
#include "penboot/solvers.hpp"
#include "penboot/weights.hpp"

// Residual and perturbation bootstrap replicates.  A replicate is a pure
// function of (fit, problem, spec, seed), so runs are reproducible and safe
// to parallelize; the run aggregates replicates by index.

namespace penboot {

struct ResidualMethod {};
struct PerturbationMethod {
  WeightDistribution dist;
};
using BootstrapMethod = std::variant<ResidualMethod, PerturbationMethod>;

struct Replicate {
  VectorXd beta_star;
  std::vector<int> active_star;
  // sigma* for residual replicates, sigma** for perturbation replicates;
  // see the formulas on residual_replicate / perturbation_replicate.
  double residual_scale = 0.0;
  // The random input of the replicate: drawn errors epsilon* (residual) or
  // multipliers G* (perturbation).  Stored so studentized quantities can be
  // rebuilt without re-running the draw.
  VectorXd draws;
  // Replicate initial estimate for the weighted families, absent otherwise.
  std::optional<VectorXd> initial_star;
  std::uint64_t seed = 0;
  bool from_perturbation = false;
  bool ok = true;
  std::string failure;              // diagnostic when !ok
};

struct BootstrapRun {
  BootstrapMethod method;
  int B = 0;
  std::uint64_t master_seed = 0;
  std::vector<Replicate> replicates;  // length B; failed entries keep ok=false
  int failures = 0;
};

// Pseudo-responses z_i = yhat_i + r_i (g_i - mu) / mu.  Fitting the penalized
// objective on (X, z) minimizes the doubly-weighted perturbation criterion,
// which never has to be formed.
VectorXd pseudo_values(const VectorXd& fitted, const VectorXd& residuals,
                       const VectorXd& gstar, double mu);

// Refit on y*_i = yhat_i + eps*_i with eps* resampled (with replacement, by
// inverse CDF on the seed's uniform stream) from the centered residuals
// eps_i - mean(eps).  residual_scale = sqrt(n^{-1} sum eps*_i^2).  Weighted
// families recompute their initial estimate on (X, y*).  A refit that fails
// to converge is returned with ok=false instead of throwing.
Replicate residual_replicate(const Fit& fit, const RegressionProblem& problem,
                             const PenaltySpec& spec, std::uint64_t seed,
                             const SolverConfig& config = {});

// Refit on the pseudo-responses built from n multiplier draws G* ~ dist.
// residual_scale = sqrt(mu^{-2} n^{-1} sum (y_i - x_i'beta*)^2 (g_i - mu)^2),
// evaluated against the original responses.  Initial estimates for the
// weighted families are recomputed on (X, z), which minimizes the matching
// perturbed least-squares criterion.
Replicate perturbation_replicate(const Fit& fit, const RegressionProblem& problem,
                                 const PenaltySpec& spec, const WeightDistribution& dist,
                                 std::uint64_t seed, const SolverConfig& config = {});

// B replicates, replicate i seeded with derive_seed(master_seed, i).  Throws
// when more than 5% of the replicates fail, naming the count; failed
// replicates otherwise stay in place flagged ok=false.  Replicates are
// independent, so the loop may be split across threads; the result does not
// depend on the split.
BootstrapRun run_bootstrap(const Fit& fit, const RegressionProblem& problem,
                           const PenaltySpec& spec, const BootstrapMethod& method,
                           int B, std::uint64_t master_seed,
                           const SolverConfig& config = {}, int threads = 1);

} // namespace penboot
