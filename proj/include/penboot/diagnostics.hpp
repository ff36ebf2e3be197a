#pragma once

#include <cstdint>
#include <vector>

#include "penboot/dgp.hpp"
#include "penboot/model.hpp"
#include "penboot/solvers.hpp"

namespace penboot {

// Probability the oracle normal law assigns to [a, b]. The variance is
// sigma_sq * d' Sigma d; infinite endpoints are allowed.
double oracle_interval_prob(double a, double b, double sigma_sq, const MatrixXd& Sigma,
                            const VectorXd& d_dir);

struct DeltaOptions {
  // Restrict the interval class to half-lines (-inf, x]; the statistic then
  // reduces to the Kolmogorov distance.
  bool one_sided_only = false;
  int grid_points = 512;
};

// Sup over intervals of |empirical(samples) - N(0, sd^2)|. Evaluated on an
// even grid spanning +-6 sd and the empirical support, joined with the
// (coarsened) sample points themselves; left limits at the evaluation points
// account for closed interval endpoints.
double delta_from_samples(std::vector<double> samples, double oracle_sd,
                          const DeltaOptions& opts = {});

struct DeltaEstimate {
  double delta = 0.0;
  double oracle_sd = 0.0;
  int failures = 0;
  int used = 0;
};

// Monte Carlo estimate of the oracle approximation error for the centered
// statistic sqrt(n) D (beta-hat - beta). The design is drawn once from the
// spec's own seed and held fixed; `seed` drives the per-repetition error
// streams. The n argument overrides the spec so one spec can sweep a grid.
DeltaEstimate estimate_delta(const DGPSpec& dgp, const PenaltySpec& spec,
                             const ContrastMatrix& D, int n, int M, std::uint64_t seed,
                             const SolverConfig& config = {}, int threads = 1);

} // namespace penboot
