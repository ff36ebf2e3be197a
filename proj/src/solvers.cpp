#include "penboot/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "penboot/kernels.hpp"
#include "penboot/penalties.hpp"

namespace penboot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void finish_fit(Fit& fit, const RegressionProblem& problem, const SolverConfig& config) {
  fit.fitted = problem.X * fit.beta;
  fit.residuals = problem.y - fit.fitted;
  fit.active_set = active_set_of(fit.beta, config.zero_tol);
}

// Total per-coordinate l1 weights n * P'(|initial_j|) for the weighted
// families.  Exactly-zero initial coefficients under the adaptive lasso or
// a power/log base give infinite weight, which the descent loop treats as
// an exclusion.
VectorXd total_weights_from_initial(const RegressionProblem& problem,
                                    const PenaltySpec& spec, const VectorXd& init) {
  const int p = problem.p();
  const double n = problem.n();
  VectorXd v(p);
  if (const auto* al = std::get_if<AdaptiveLassoPenalty>(&spec)) {
    for (int j = 0; j < p; ++j) {
      double b = std::abs(init[j]);
      v[j] = b == 0.0 ? kInf : n * al->lambda / std::pow(b, al->gamma);
    }
    return v;
  }
  const auto& os = std::get<OneStepPenalty>(spec);
  for (int j = 0; j < p; ++j) {
    double b = std::abs(init[j]);
    if (b == 0.0 &&
        (std::holds_alternative<PowerBase>(os.base) || std::holds_alternative<LogBase>(os.base))) {
      v[j] = kInf;
      continue;
    }
    v[j] = n * penalty_derivative(spec, 0.0, b);
  }
  return v;
}

// Stationarity residual for explicit weights (possibly infinite).
double kkt_weighted(const RegressionProblem& problem, const VectorXd& v,
                    const VectorXd& beta, double zero_tol) {
  const int p = problem.p();
  VectorXd r = problem.y - problem.X * beta;
  double worst = 0.0;
  for (int j = 0; j < p; ++j) {
    double g = -2.0 * kernels::dot(problem.X.col(j).data(), r.data(), r.size());
    double viol;
    if (std::abs(beta[j]) > zero_tol) {
      viol = std::isinf(v[j]) ? kInf : std::abs(g + v[j] * (beta[j] > 0 ? 1.0 : -1.0));
    } else {
      viol = std::isinf(v[j]) ? 0.0 : std::max(std::abs(g) - v[j], 0.0);
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

// Exact minimizer of c (b - z)^2 + P(|b|) for the folded-concave families,
// found by comparing the clamped stationary point of each branch with zero.
// Valid whenever every branch is strictly convex, which c > 1/a guarantees
// for both SCAD (a > 2) and MCP.
double foldcave_update(double z, double c, const PenaltySpec& spec) {
  const double m = std::abs(z);
  const double s = z >= 0 ? 1.0 : -1.0;
  double best_b = 0.0;
  double best_q = c * m * m;  // b = 0, penalty vanishes

  auto consider = [&](double b, double penalty_value) {
    if (b == best_b) return;
    double q = c * (b - m) * (b - m) + penalty_value;
    if (q < best_q) {
      best_q = q;
      best_b = b;
    }
  };

  if (const auto* sc = std::get_if<ScadPenalty>(&spec)) {
    const double lam = sc->lambda, a = sc->a;
    double b1 = std::clamp(m - lam / (2.0 * c), 0.0, lam);
    consider(b1, scad_value(b1, lam, a));
    double denom = 2.0 * c * (a - 1.0) - 1.0;
    double b2 = std::clamp((2.0 * c * m * (a - 1.0) - a * lam) / denom, lam, a * lam);
    consider(b2, scad_value(b2, lam, a));
    double b3 = std::max(m, a * lam);
    consider(b3, scad_value(b3, lam, a));
  } else {
    const auto& mc = std::get<McpPenalty>(spec);
    const double lam = mc.lambda, a = mc.a;
    double denom = 2.0 * c - 1.0 / a;
    double b1 = std::clamp((2.0 * c * m - lam) / denom, 0.0, a * lam);
    consider(b1, mcp_value(b1, lam, a));
    double b2 = std::max(m, a * lam);
    consider(b2, mcp_value(b2, lam, a));
  }
  return s * best_b;
}

struct DescentResult {
  VectorXd beta;
  int sweeps = 0;
};

// Cyclic coordinate descent.  update(j, z_j, S_j) returns the new value of
// coordinate j given the univariate least-squares solution z_j = rho/S and
// column energy S = sum_i x_ij^2.
template <typename Update>
DescentResult coordinate_descent(const RegressionProblem& problem, const SolverConfig& config,
                                 Update&& update, const std::vector<char>& excluded,
                                 const std::function<double(const VectorXd&)>& kkt_fn) {
  const int n = problem.n(), p = problem.p();
  VectorXd beta = VectorXd::Zero(p);
  VectorXd r = problem.y;
  VectorXd col_sq(p);
  for (int j = 0; j < p; ++j)
    col_sq[j] = kernels::sum_sq(problem.X.col(j).data(), n);

  for (int sweep = 1; sweep <= config.max_iters; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j < p; ++j) {
      if (excluded[j] || col_sq[j] == 0.0) continue;
      const double* xj = problem.X.col(j).data();
      double rho = kernels::dot(xj, r.data(), n) + col_sq[j] * beta[j];
      double next = update(j, rho / col_sq[j], col_sq[j]);
      double change = beta[j] - next;
      if (change != 0.0) {
        kernels::axpy(change, xj, r.data(), n);
        beta[j] = next;
      }
      max_change = std::max(max_change, std::abs(change));
    }
    if (max_change <= config.coord_tol) {
      if (!kkt_fn || kkt_fn(beta) <= config.kkt_tol) return {beta, sweep};
    }
  }
  double kkt = kkt_fn ? kkt_fn(beta) : std::numeric_limits<double>::quiet_NaN();
  std::ostringstream os;
  os << "coordinate descent did not converge in " << config.max_iters
     << " sweeps (stationarity residual " << kkt << ")";
  throw ConvergenceError(os.str(), beta, kkt);
}

Fit fit_weighted_l1_impl(const RegressionProblem& problem, const VectorXd& v,
                         const SolverConfig& config) {
  const int p = problem.p();
  std::vector<char> excluded(p, 0);
  for (int j = 0; j < p; ++j)
    if (std::isinf(v[j])) excluded[j] = 1;

  auto update = [&v](int j, double z, double S) {
    return soft(z, v[j] / (2.0 * S));
  };
  auto kkt_fn = [&](const VectorXd& b) {
    return kkt_weighted(problem, v, b, config.zero_tol);
  };
  auto res = coordinate_descent(problem, config, update, excluded, kkt_fn);

  Fit fit;
  fit.beta = std::move(res.beta);
  fit.iterations = res.sweeps;
  fit.kkt_residual = kkt_fn(fit.beta);
  finish_fit(fit, problem, config);
  return fit;
}

} // namespace

Fit fit_ols(const RegressionProblem& problem, const std::optional<std::vector<int>>& support) {
  const int p = problem.p();
  std::vector<int> s;
  if (support) {
    s = *support;
  } else {
    s.resize(p);
    for (int j = 0; j < p; ++j) s[j] = j;
  }

  Fit fit;
  fit.penalty = LassoPenalty{0.0};
  fit.iterations = 1;
  if (s.empty()) {
    fit.beta = VectorXd::Zero(p);
    fit.kkt_residual = 0.0;
    finish_fit(fit, problem, {});
    return fit;
  }

  MatrixXd Xs(problem.n(), static_cast<int>(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) Xs.col(static_cast<int>(k)) = problem.X.col(s[k]);
  MatrixXd G = Xs.transpose() * Xs;

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(G);
  double min_ev = eig.eigenvalues().minCoeff();
  double max_ev = eig.eigenvalues().maxCoeff();
  if (min_ev <= 1e-12 * std::max(1.0, max_ev)) {
    std::ostringstream os;
    os << "fit_ols: singular Gram block, smallest eigenvalue " << min_ev;
    throw std::invalid_argument(os.str());
  }

  VectorXd rhs = Xs.transpose() * problem.y;
  VectorXd sol = G.ldlt().solve(rhs);
  fit.beta = VectorXd::Zero(p);
  for (std::size_t k = 0; k < s.size(); ++k) fit.beta[s[k]] = sol[static_cast<int>(k)];
  fit.kkt_residual = (G * sol - rhs).cwiseAbs().maxCoeff();
  finish_fit(fit, problem, {});
  fit.active_set = s;  // report the requested support, not thresholded magnitudes
  return fit;
}

VectorXd initial_estimate(const RegressionProblem& problem, const InitialEstimator& init,
                          const SolverConfig& config) {
  if (std::holds_alternative<OlsInitial>(init)) return fit_ols(problem).beta;
  const auto& li = std::get<LassoInitial>(init);
  return fit_penalized(problem, LassoPenalty{li.lambda}, config).beta;
}

Fit fit_weighted_l1(const RegressionProblem& problem, const VectorXd& total_weights,
                    const SolverConfig& config) {
  return fit_weighted_l1_impl(problem, total_weights, config);
}

Fit fit_penalized(const RegressionProblem& problem, const PenaltySpec& spec,
                  const SolverConfig& config) {
  validate(spec);
  const int p = problem.p();
  const double n = problem.n();

  if (const auto* la = std::get_if<LassoPenalty>(&spec)) {
    Fit fit = fit_weighted_l1_impl(problem, VectorXd::Constant(p, la->lambda), config);
    fit.penalty = spec;
    return fit;
  }

  if (const auto* ps = std::get_if<PostSelectionOls>(&spec)) {
    Fit selector = fit_penalized(problem, LassoPenalty{ps->selector_lambda}, config);
    Fit fit = fit_ols(problem, selector.active_set);
    fit.penalty = spec;
    fit.iterations = selector.iterations;
    fit.active_set = selector.active_set;
    return fit;
  }

  if (needs_initial(spec)) {
    InitialEstimator init = std::holds_alternative<AdaptiveLassoPenalty>(spec)
                                ? std::get<AdaptiveLassoPenalty>(spec).initial
                                : std::get<OneStepPenalty>(spec).initial;
    VectorXd init_beta = initial_estimate(problem, init, config);
    if (std::holds_alternative<AdaptiveLassoPenalty>(spec) &&
        std::holds_alternative<OlsInitial>(init)) {
      for (int j = 0; j < p; ++j)
        if (std::abs(init_beta[j]) < 1e-8)
          throw std::invalid_argument(
              "adaptive lasso: OLS initial coefficient at index " + std::to_string(j) +
              " is below 1e-8; use a lasso initial so that zeros are structural");
    }
    VectorXd v = total_weights_from_initial(problem, spec, init_beta);
    Fit fit = fit_weighted_l1_impl(problem, v, config);
    fit.penalty = spec;
    fit.initial_beta = std::move(init_beta);
    return fit;
  }

  // SCAD / MCP.  The exact univariate update needs every normalized Gram
  // diagonal above 1/a; otherwise run the one-step surrogate.
  const double a = std::holds_alternative<ScadPenalty>(spec) ? std::get<ScadPenalty>(spec).a
                                                             : std::get<McpPenalty>(spec).a;
  double min_diag = kInf;
  for (int j = 0; j < p; ++j)
    min_diag = std::min(min_diag, kernels::sum_sq(problem.X.col(j).data(), problem.n()) / n);
  if (!(min_diag > 1.0 / a)) {
    OneStepPenalty surrogate;
    surrogate.initial = OlsInitial{};
    if (const auto* sc = std::get_if<ScadPenalty>(&spec))
      surrogate = OneStepPenalty{sc->lambda, ScadBase{sc->a}, OlsInitial{}};
    else {
      const auto& mc = std::get<McpPenalty>(spec);
      surrogate = OneStepPenalty{mc.lambda, McpBase{mc.a}, OlsInitial{}};
    }
    Fit fit = fit_penalized(problem, surrogate, config);
    fit.penalty = spec;
    fit.lla_fallback = true;
    return fit;
  }

  std::vector<char> excluded(p, 0);
  auto update = [&](int, double z, double S) {
    return foldcave_update(z, S / n, spec);
  };
  auto kkt_fn = [&](const VectorXd& b) {
    // linearized stationarity, reported rather than enforced
    VectorXd v(p);
    for (int j = 0; j < p; ++j) v[j] = n * penalty_derivative(spec, std::abs(b[j]));
    return kkt_weighted(problem, v, b, config.zero_tol);
  };
  auto res = coordinate_descent(problem, config, update, excluded, nullptr);

  Fit fit;
  fit.beta = std::move(res.beta);
  fit.iterations = res.sweeps;
  fit.kkt_residual = kkt_fn(fit.beta);
  fit.penalty = spec;
  finish_fit(fit, problem, config);
  return fit;
}

double kkt_residual(const RegressionProblem& problem, const PenaltySpec& spec,
                    const VectorXd& beta, std::optional<VectorXd> initial_beta) {
  const int p = problem.p();
  const double n = problem.n();
  VectorXd v(p);
  if (const auto* la = std::get_if<LassoPenalty>(&spec)) {
    v.setConstant(la->lambda);
  } else if (std::holds_alternative<ScadPenalty>(spec) || std::holds_alternative<McpPenalty>(spec)) {
    for (int j = 0; j < p; ++j) v[j] = n * penalty_derivative(spec, std::abs(beta[j]));
  } else if (needs_initial(spec)) {
    if (!initial_beta) {
      InitialEstimator init = std::holds_alternative<AdaptiveLassoPenalty>(spec)
                                  ? std::get<AdaptiveLassoPenalty>(spec).initial
                                  : std::get<OneStepPenalty>(spec).initial;
      initial_beta = initial_estimate(problem, init);
    }
    v = total_weights_from_initial(problem, spec, *initial_beta);
  } else {
    throw std::invalid_argument("kkt_residual: family has no weighted-l1 representation");
  }
  return kkt_weighted(problem, v, beta, kActiveZeroTol);
}

double penalized_objective(const RegressionProblem& problem, const PenaltySpec& spec,
                           const VectorXd& beta, std::optional<VectorXd> initial_beta) {
  const double n = problem.n();
  double rss = (problem.y - problem.X * beta).squaredNorm();
  double pen = 0.0;
  if (const auto* la = std::get_if<LassoPenalty>(&spec)) {
    pen = la->lambda * beta.cwiseAbs().sum();
  } else if (const auto* sc = std::get_if<ScadPenalty>(&spec)) {
    for (int j = 0; j < beta.size(); ++j) pen += n * scad_value(std::abs(beta[j]), sc->lambda, sc->a);
  } else if (const auto* mc = std::get_if<McpPenalty>(&spec)) {
    for (int j = 0; j < beta.size(); ++j) pen += n * mcp_value(std::abs(beta[j]), mc->lambda, mc->a);
  } else if (needs_initial(spec)) {
    if (!initial_beta) {
      InitialEstimator init = std::holds_alternative<AdaptiveLassoPenalty>(spec)
                                  ? std::get<AdaptiveLassoPenalty>(spec).initial
                                  : std::get<OneStepPenalty>(spec).initial;
      initial_beta = initial_estimate(problem, init);
    }
    VectorXd v = total_weights_from_initial(problem, spec, *initial_beta);
    for (int j = 0; j < beta.size(); ++j) {
      if (std::isinf(v[j])) {
        if (beta[j] != 0.0) return kInf;
      } else {
        pen += v[j] * std::abs(beta[j]);
      }
    }
  } else {
    pen = 0.0;  // post-selection OLS
  }
  return rss + pen;
}

double check_irrepresentable(const RegressionProblem& problem,
                             const std::vector<int>& true_active,
                             const VectorXd& true_signs) {
  auto part = gram_partition(problem, true_active);
  if (part.C11.rows() == 0) throw std::invalid_argument("check_irrepresentable: empty active set");

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(part.C11);
  double min_ev = eig.eigenvalues().minCoeff();
  if (min_ev <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    std::ostringstream os;
    os << "check_irrepresentable: singular C11, smallest eigenvalue " << min_ev;
    throw std::invalid_argument(os.str());
  }
  if (part.C21.rows() == 0) return 0.0;
  VectorXd x = part.C11.ldlt().solve(true_signs);
  return (part.C21 * x).cwiseAbs().maxCoeff();
}

} // namespace penboot
