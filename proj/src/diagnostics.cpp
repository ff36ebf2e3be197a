#include "penboot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "penboot/pivots.hpp"
#include "penboot/rng.hpp"

namespace penboot {

double oracle_interval_prob(double a, double b, double sigma_sq, const MatrixXd& Sigma,
                            const VectorXd& d_dir) {
  if (Sigma.rows() != Sigma.cols() || Sigma.rows() != d_dir.size())
    throw std::invalid_argument("oracle_interval_prob: dimension mismatch");
  if (a > b) throw std::invalid_argument("oracle_interval_prob: interval endpoints reversed");
  double var = sigma_sq * d_dir.dot(Sigma * d_dir);
  if (!(var > 0.0))
    throw std::invalid_argument("oracle_interval_prob: nonpositive oracle variance");
  double s = std::sqrt(var);
  auto cdf = [&](double x) {
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    return normal_cdf(x / s);
  };
  return cdf(b) - cdf(a);
}

double delta_from_samples(std::vector<double> samples, double oracle_sd,
                          const DeltaOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("delta_from_samples: no samples");
  if (!(oracle_sd > 0.0))
    throw std::invalid_argument("delta_from_samples: oracle scale must be positive");
  if (opts.grid_points < 2)
    throw std::invalid_argument("delta_from_samples: grid needs at least 2 points");

  std::sort(samples.begin(), samples.end());
  const auto M = samples.size();
  const double lo = std::min(-6.0 * oracle_sd, samples.front());
  const double hi = std::max(6.0 * oracle_sd, samples.back());

  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(opts.grid_points) + M + 1);
  for (int k = 0; k < opts.grid_points; ++k)
    pts.push_back(lo + (hi - lo) * k / (opts.grid_points - 1));
  // sample points carry the jumps of the empirical CDF; cap their number so
  // the endpoint set stays within the grid budget
  const std::size_t stride = (M + static_cast<std::size_t>(opts.grid_points) - 1) /
                             static_cast<std::size_t>(opts.grid_points);
  for (std::size_t i = 0; i < M; i += stride) pts.push_back(samples[i]);
  pts.push_back(samples.back());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // d(x) = F(x) - Phi(x/sd) and its left limit; the sup over intervals [x, y]
  // (half-lines included as limits) is max(0, sup d) - min(0, inf d-)
  double max_d = 0.0, min_dm = 0.0, ks = 0.0;
  for (double x : pts) {
    double f = static_cast<double>(std::upper_bound(samples.begin(), samples.end(), x) -
                                   samples.begin()) /
               static_cast<double>(M);
    double fm = static_cast<double>(std::lower_bound(samples.begin(), samples.end(), x) -
                                    samples.begin()) /
                static_cast<double>(M);
    double phi = normal_cdf(x / oracle_sd);
    max_d = std::max(max_d, f - phi);
    min_dm = std::min(min_dm, fm - phi);
    ks = std::max({ks, std::fabs(f - phi), std::fabs(fm - phi)});
  }
  return opts.one_sided_only ? ks : max_d - min_dm;
}

DeltaEstimate estimate_delta(const DGPSpec& dgp, const PenaltySpec& spec,
                             const ContrastMatrix& D, int n, int M, std::uint64_t seed,
                             const SolverConfig& config, int threads) {
  if (M < 100)
    throw std::invalid_argument("estimate_delta: needs at least 100 repetitions");
  if (threads < 1) throw std::invalid_argument("estimate_delta: thread count must be positive");

  DGPSpec local = dgp;
  local.n = n;
  validate(local);
  validate(spec);
  if (D.q() != 1 || D.D.cols() != local.p)
    throw std::invalid_argument("estimate_delta: contrast must be a single row over p columns");

  VectorXd beta = full_beta(local);
  std::vector<int> active = active_set_of(beta);
  if (active.empty())
    throw std::invalid_argument("estimate_delta: oracle law is degenerate without signal");

  MatrixXd design = generate_design(local, derive_seed(local.seed, 1));

  RegressionProblem shape;
  shape.X = design;
  shape.y = VectorXd::Zero(local.n);
  auto part = gram_partition(shape, active);
  MatrixXd D1 = contrast_active(D, active);
  double oracle_var = error_sd(local.error_dist) * error_sd(local.error_dist) *
                      (D1 * part.C11.ldlt().solve(D1.transpose()))(0, 0);
  if (!(oracle_var > 0.0))
    throw std::invalid_argument("estimate_delta: nonpositive oracle variance");

  std::vector<double> stats(static_cast<std::size_t>(M));
  std::vector<char> ok(static_cast<std::size_t>(M), 0);
  std::exception_ptr first_error;
  std::mutex error_lock;

  auto worker = [&](int begin, int end) {
    for (int m = begin; m < end; ++m) {
      try {
        Dataset data = generate_dataset(local, design, derive_seed(seed, m));
        Fit fit = fit_penalized(data.problem, spec, config);
        stats[static_cast<std::size_t>(m)] = t_statistic(fit, beta, D)[0];
        ok[static_cast<std::size_t>(m)] = 1;
      } catch (const ConvergenceError&) {
        // counted below
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_lock);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (threads == 1) {
    worker(0, M);
  } else {
    std::vector<std::thread> pool;
    int chunk = (M + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int begin = t * chunk;
      int end = std::min(M, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  DeltaEstimate out;
  out.oracle_sd = std::sqrt(oracle_var);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    if (ok[static_cast<std::size_t>(m)])
      samples.push_back(stats[static_cast<std::size_t>(m)]);
    else
      ++out.failures;
  }
  if (20 * out.failures > M)
    throw std::runtime_error("estimate_delta: more than 5% of repetitions failed to "
                             "converge (" + std::to_string(out.failures) + " of " +
                             std::to_string(M) + ")");
  out.used = static_cast<int>(samples.size());
  out.delta = delta_from_samples(std::move(samples), out.oracle_sd);
  return out;
}

} // namespace penboot
