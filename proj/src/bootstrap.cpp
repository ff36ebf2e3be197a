#include "penboot/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "penboot/rng.hpp"

namespace penboot {

namespace {

// Runs the refit and fills the common record fields, converting fit
// failures into a flagged record.
void refit_into(Replicate& rep, const RegressionProblem& starred, const PenaltySpec& spec,
                const SolverConfig& config) {
  try {
    Fit refit = fit_penalized(starred, spec, config);
    rep.beta_star = std::move(refit.beta);
    rep.active_star = std::move(refit.active_set);
    rep.initial_star = std::move(refit.initial_beta);
  } catch (const ConvergenceError& e) {
    rep.ok = false;
    rep.failure = e.what();
  } catch (const std::invalid_argument& e) {
    // data-driven degeneracy in the replicate, e.g. a near-zero OLS initial
    rep.ok = false;
    rep.failure = e.what();
  }
}

} // namespace

VectorXd pseudo_values(const VectorXd& fitted, const VectorXd& residuals,
                       const VectorXd& gstar, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("pseudo_values: mu must be positive");
  if (fitted.size() != residuals.size() || fitted.size() != gstar.size())
    throw std::invalid_argument("pseudo_values: length mismatch");
  return fitted + residuals.cwiseProduct((gstar.array() - mu).matrix()) / mu;
}

Replicate residual_replicate(const Fit& fit, const RegressionProblem& problem,
                             const PenaltySpec& spec, std::uint64_t seed,
                             const SolverConfig& config) {
  const int n = problem.n();
  if (n < 2) throw std::invalid_argument("residual_replicate: need n >= 2");

  VectorXd pool = fit.residuals.array() - fit.residuals.mean();

  Replicate rep;
  rep.seed = seed;
  Rng rng(seed);
  rep.draws.resize(n);
  for (int i = 0; i < n; ++i) rep.draws[i] = pool[static_cast<int>(rng.index(n))];
  rep.residual_scale = std::sqrt(rep.draws.squaredNorm() / n);

  RegressionProblem starred = problem;
  starred.y = fit.fitted + rep.draws;
  refit_into(rep, starred, spec, config);
  return rep;
}

Replicate perturbation_replicate(const Fit& fit, const RegressionProblem& problem,
                                 const PenaltySpec& spec, const WeightDistribution& dist,
                                 std::uint64_t seed, const SolverConfig& config) {
  const int n = problem.n();
  if (n < 2) throw std::invalid_argument("perturbation_replicate: need n >= 2");

  Replicate rep;
  rep.seed = seed;
  rep.from_perturbation = true;
  rep.draws = sample_weights(dist, n, seed);

  RegressionProblem starred = problem;
  starred.y = pseudo_values(fit.fitted, fit.residuals, rep.draws, dist.mu);
  refit_into(rep, starred, spec, config);

  if (rep.ok) {
    // scale from the original responses against the replicate coefficients
    VectorXd eps = problem.y - problem.X * rep.beta_star;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double w = (rep.draws[i] - dist.mu) / dist.mu;
      s += eps[i] * eps[i] * w * w;
    }
    rep.residual_scale = std::sqrt(s / n);
  }
  return rep;
}

BootstrapRun run_bootstrap(const Fit& fit, const RegressionProblem& problem,
                           const PenaltySpec& spec, const BootstrapMethod& method,
                           int B, std::uint64_t master_seed, const SolverConfig& config,
                           int threads) {
  if (B < 1) throw std::invalid_argument("run_bootstrap: B must be at least 1");
  if (threads < 1) throw std::invalid_argument("run_bootstrap: thread count must be positive");

  BootstrapRun run;
  run.method = method;
  run.B = B;
  run.master_seed = master_seed;
  run.replicates.resize(static_cast<std::size_t>(B));

  const auto* perturb = std::get_if<PerturbationMethod>(&method);
  auto fill = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
      run.replicates[static_cast<std::size_t>(i)] =
          perturb ? perturbation_replicate(fit, problem, spec, perturb->dist, seed, config)
                  : residual_replicate(fit, problem, spec, seed, config);
    }
  };
  if (threads == 1) {
    fill(0, B);
  } else {
    std::vector<std::thread> pool;
    int chunk = (B + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int begin = t * chunk;
      int end = std::min(B, begin + chunk);
      if (begin < end) pool.emplace_back(fill, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& rep : run.replicates)
    if (!rep.ok) ++run.failures;

  if (20 * run.failures > B) {
    std::ostringstream os;
    os << "run_bootstrap: " << run.failures << " of " << B
       << " replicates failed to converge; first failure: ";
    for (const auto& r : run.replicates)
      if (!r.ok) {
        os << r.failure;
        break;
      }
    throw std::runtime_error(os.str());
  }
  return run;
}

} // namespace penboot
