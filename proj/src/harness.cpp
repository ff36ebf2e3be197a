#include "penboot/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "penboot/pivots.hpp"
#include "penboot/rng.hpp"
#include "penboot/solvers.hpp"

namespace penboot {

namespace {

ContrastMatrix contrast_or_first(const VectorXd& row, int p) {
  ContrastMatrix D;
  if (row.size() == 0) {
    D.D = MatrixXd::Zero(1, p);
    D.D(0, 0) = 1.0;
  } else {
    if (row.size() != p)
      throw std::invalid_argument("contrast length does not match the number of columns");
    D.D = row.transpose();
  }
  return D;
}

double rate_se(double rate, int count) {
  return count > 0 ? std::sqrt(rate * (1.0 - rate) / count) : 0.0;
}

bool lasso_selected(const PenaltySpec& spec) {
  return std::holds_alternative<LassoPenalty>(spec) ||
         std::holds_alternative<PostSelectionOls>(spec);
}

// Outcome slots written by index so aggregation cannot depend on thread
// interleaving.
struct RepOutcome {
  enum Status : char { Ok, FitFailed, BootFailed } status = FitFailed;
  bool covered = false;
  bool selected = false;
  bool strong = false;
  double width = 0.0;
  bool width_finite = false;
};

} // namespace

double schedule_lambda(LambdaSchedule schedule, double c, int n) {
  if (n < 1) throw std::invalid_argument("schedule_lambda: n must be positive");
  switch (schedule) {
    case LambdaSchedule::Fixed:
      return c;
    case LambdaSchedule::SqrtNLogN:
      return c * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));
    case LambdaSchedule::NPower06:
      return c * std::pow(static_cast<double>(n), 0.6);
  }
  throw std::logic_error("unreachable schedule");
}

PenaltySpec with_lambda(const PenaltySpec& spec, double lambda) {
  PenaltySpec out = spec;
  std::visit(
      [lambda](auto& pen) {
        using P = std::decay_t<decltype(pen)>;
        if constexpr (std::is_same_v<P, PostSelectionOls>)
          pen.selector_lambda = lambda;
        else
          pen.lambda = lambda;
      },
      out);
  return out;
}

void validate(const ExperimentConfig& config) {
  validate(config.dgp);
  validate(config.penalty);
  if (config.B < 100 || config.M < 100)
    throw std::invalid_argument("coverage runs need B >= 100 and M >= 100");
  if (!(config.level > 0.0 && config.level < 1.0))
    throw std::invalid_argument("confidence level must lie strictly between 0 and 1");
  if (config.threads < 1 || config.boot_threads < 1)
    throw std::invalid_argument("thread counts must be positive");
  const bool perturbation = std::holds_alternative<PerturbationMethod>(config.method);
  if (config.interval_kind == IntervalKind::SymmetricResidual && perturbation)
    throw std::invalid_argument("residual interval kind paired with a perturbation method");
  if ((config.interval_kind == IntervalKind::SymmetricPerturbCorrected ||
       config.interval_kind == IntervalKind::SymmetricPerturbUncorrected) &&
      !perturbation)
    throw std::invalid_argument("perturbation interval kind paired with a residual method");
  contrast_or_first(config.contrast, config.dgp.p);
}

SummaryReport run_coverage(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  ContrastMatrix D = contrast_or_first(config.contrast, config.dgp.p);
  VectorXd beta_true = full_beta(config.dgp);
  const double theta = (D.D * beta_true)(0, 0);
  std::vector<int> true_active = active_set_of(beta_true);
  const EstimatorClass cls = estimator_class(config.penalty);

  MatrixXd design = generate_design(config.dgp, derive_seed(config.dgp.seed, 1));

  SummaryReport report;

  if (lasso_selected(config.penalty) && !true_active.empty() &&
      static_cast<int>(true_active.size()) < config.dgp.p) {
    RegressionProblem shape;
    shape.X = design;
    shape.y = VectorXd::Zero(config.dgp.n);
    VectorXd signs(true_active.size());
    for (std::size_t k = 0; k < true_active.size(); ++k)
      signs[static_cast<Eigen::Index>(k)] = beta_true[true_active[k]] > 0 ? 1.0 : -1.0;
    double irr = check_irrepresentable(shape, true_active, signs);
    if (irr >= 1.0) {
      report.irrepresentable_ok = false;
      report.notes.push_back("sign-consistency condition violated: max |C21 C11^{-1} s| = " +
                             std::to_string(irr));
    }
  }

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(config.M));
  std::exception_ptr first_error;
  std::mutex error_lock;

  auto worker = [&](int begin, int end) {
    for (int m = begin; m < end; ++m) {
      auto& slot = outcomes[static_cast<std::size_t>(m)];
      std::uint64_t rep_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(m));
      try {
        Dataset data = generate_dataset(config.dgp, design, rep_seed);
        Fit fit;
        try {
          fit = fit_penalized(data.problem, config.penalty, config.solver);
        } catch (const ConvergenceError&) {
          slot.status = RepOutcome::FitFailed;
          continue;
        }

        slot.selected = fit.active_set == true_active;
        if (slot.selected) {
          Fit ols = fit_ols(data.problem, true_active);
          double worst = 0.0;
          for (int j : true_active)
            worst = std::max(worst, std::fabs(fit.beta[j] - ols.beta[j]) /
                                        (1.0 + std::fabs(ols.beta[j])));
          slot.strong = worst < 1e-6;
        }

        PivotBundle bundle;
        try {
          bundle = pivot_bundle(fit, data.problem, D, cls, data.beta_true);
        } catch (const std::invalid_argument&) {
          slot.status = RepOutcome::FitFailed;  // degenerate fit, e.g. empty active set
          continue;
        }

        try {
          BootstrapRun boot =
              run_bootstrap(fit, data.problem, config.penalty, config.method, config.B,
                            derive_seed(rep_seed, 1), config.solver, config.boot_threads);
          ConfidenceInterval ci = symmetric_ci(boot, bundle, fit, data.problem, D,
                                               config.level, config.interval_kind);
          slot.covered = ci.lower <= theta && theta <= ci.upper;
          slot.width = ci.upper - ci.lower;
          slot.width_finite = std::isfinite(slot.width);
          slot.status = RepOutcome::Ok;
        } catch (const std::runtime_error&) {
          slot.status = RepOutcome::BootFailed;
        } catch (const std::invalid_argument&) {
          slot.status = RepOutcome::BootFailed;  // too few usable replicates
        }
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_lock);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (config.threads == 1) {
    worker(0, config.M);
  } else {
    std::vector<std::thread> pool;
    int chunk = (config.M + config.threads - 1) / config.threads;
    for (int t = 0; t < config.threads; ++t) {
      int begin = t * chunk;
      int end = std::min(config.M, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  int covers = 0, selected = 0, strong = 0, widths = 0;
  double width_sum = 0.0;
  for (const auto& slot : outcomes) {
    switch (slot.status) {
      case RepOutcome::FitFailed:
        ++report.fit_failures;
        continue;
      case RepOutcome::BootFailed:
        ++report.bootstrap_failures;
        break;
      case RepOutcome::Ok:
        ++report.used;
        covers += slot.covered ? 1 : 0;
        if (slot.width_finite) {
          width_sum += slot.width;
          ++widths;
        }
        break;
    }
    // selection is recorded whenever the fit itself succeeded
    selected += slot.selected ? 1 : 0;
    strong += slot.strong ? 1 : 0;
  }

  const int fitted = config.M - report.fit_failures;
  if (report.used > 0) {
    report.coverage = static_cast<double>(covers) / report.used;
    report.coverage_se = rate_se(report.coverage, report.used);
  }
  if (widths > 0) report.mean_width = width_sum / widths;
  if (fitted > 0) {
    report.selection_rate = static_cast<double>(selected) / fitted;
    report.selection_se = rate_se(report.selection_rate, fitted);
    report.strong_oracle_rate = static_cast<double>(strong) / fitted;
    report.strong_oracle_se = rate_se(report.strong_oracle_rate, fitted);
  }

  const int failures = report.fit_failures + report.bootstrap_failures;
  if (20 * failures > config.M || report.used == 0) {
    report.valid = false;
    report.notes.push_back("failure rate exceeds 5%: " + std::to_string(failures) + " of " +
                           std::to_string(config.M) + " repetitions unusable");
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SummaryReport run_delta_study(const DeltaStudyConfig& config) {
  validate(config.dgp);
  if (config.n_grid.size() < 2)
    throw std::invalid_argument("run_delta_study: need at least two grid points");
  if (config.arms.empty()) throw std::invalid_argument("run_delta_study: no estimator arms");

  const auto start = std::chrono::steady_clock::now();
  SummaryReport report;
  ContrastMatrix D = contrast_or_first(config.contrast, config.dgp.p);

  for (std::size_t a = 0; a < config.arms.size(); ++a) {
    const auto& arm = config.arms[a];
    validate(arm.penalty);
    std::uint64_t arm_seed = derive_seed(config.master_seed, a);
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
      int n = config.n_grid[i];
      DeltaPoint point;
      point.label = arm.label;
      point.cls = estimator_class(arm.penalty);
      point.n = n;
      point.lambda = schedule_lambda(arm.schedule, arm.c, n);
      PenaltySpec spec = with_lambda(arm.penalty, point.lambda);
      try {
        DeltaEstimate est = estimate_delta(config.dgp, spec, D, n, config.M,
                                           derive_seed(arm_seed, i), config.solver,
                                           config.threads);
        point.delta = est.delta;
        point.oracle_sd = est.oracle_sd;
        point.failures = est.failures;
      } catch (const std::runtime_error& err) {
        report.valid = false;
        report.notes.push_back(arm.label + " at n=" + std::to_string(n) + ": " + err.what());
        continue;
      }
      report.deltas.push_back(std::move(point));
    }
  }

  // log-log slope across n for the first class-I arm with a full set of
  // positive delta estimates
  for (const auto& arm : config.arms) {
    if (estimator_class(arm.penalty) != EstimatorClass::I) continue;
    std::vector<double> lx, ly;
    for (const auto& point : report.deltas)
      if (point.label == arm.label && point.delta > 0.0) {
        lx.push_back(std::log(static_cast<double>(point.n)));
        ly.push_back(std::log(point.delta));
      }
    if (lx.size() >= 2) {
      double mx = 0, my = 0;
      for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
      }
      mx /= lx.size();
      my /= ly.size();
      double sxy = 0, sxx = 0;
      for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
      }
      if (sxx > 0) report.class1_slope = sxy / sxx;
    }
    break;
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

} // namespace penboot
