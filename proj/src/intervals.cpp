#include "penboot/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "penboot/rng.hpp"
#include "penboot/solvers.hpp"

namespace penboot {

namespace {

// ceil(level * n) as a 1-based rank, tolerating the usual representation
// error when level * n sits on an integer.
std::size_t quantile_rank(double level, std::size_t n) {
  double target = level * static_cast<double>(n);
  double rounded = std::round(target);
  double k = (std::fabs(target - rounded) < 1e-9 * std::max(1.0, std::fabs(target)))
                 ? rounded
                 : std::ceil(target);
  if (k < 1.0) k = 1.0;
  if (k > static_cast<double>(n)) k = static_cast<double>(n);
  return static_cast<std::size_t>(k);
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must lie strictly between 0 and 1");
}

void require_scalar_contrast(const PivotBundle& bundle, const ContrastMatrix& D) {
  if (D.q() != 1 || bundle.t_n.size() != 1)
    throw std::invalid_argument("interval construction requires a scalar contrast");
}

} // namespace

PivotKind paired_pivot_kind(EstimatorClass cls, bool perturbation) {
  switch (cls) {
    case EstimatorClass::I:
      return perturbation ? PivotKind::Rcheck : PivotKind::R;
    case EstimatorClass::II:
      return perturbation ? PivotKind::Rddot : PivotKind::Rdot;
    case EstimatorClass::III:
      return perturbation ? PivotKind::Rtilde : PivotKind::Rbreve;
  }
  throw std::logic_error("unreachable estimator class");
}

double boot_quantile(const std::vector<double>& pivots, double level) {
  if (pivots.empty()) throw std::invalid_argument("boot_quantile: empty pivot sequence");
  require_level(level);
  std::vector<double> sorted = pivots;
  std::sort(sorted.begin(), sorted.end());
  return sorted[quantile_rank(level, sorted.size()) - 1];
}

double boot_quantile_symmetric(const std::vector<double>& pivots, double alpha) {
  if (pivots.empty())
    throw std::invalid_argument("boot_quantile_symmetric: empty pivot sequence");
  require_level(1.0 - alpha);
  std::vector<double> magnitudes(pivots.size());
  std::transform(pivots.begin(), pivots.end(), magnitudes.begin(),
                 [](double v) { return std::fabs(v); });
  std::sort(magnitudes.begin(), magnitudes.end());
  return magnitudes[quantile_rank(1.0 - alpha, magnitudes.size()) - 1];
}

CorrectionCoefficients correction_coefficients(const PivotBundle& bundle, const Fit& fit,
                                               const RegressionProblem& problem,
                                               const ContrastMatrix& D,
                                               const WeightDistribution& dist) {
  require_scalar_contrast(bundle, D);
  if (fit.active_set.empty())
    throw std::invalid_argument("correction_coefficients: empty active set");

  const Eigen::Index n = problem.n();
  auto part = gram_partition(problem, fit.active_set);
  MatrixXd D1 = contrast_active(D, fit.active_set);
  Eigen::RowVectorXd G = part.C11.ldlt().solve(D1.transpose()).transpose();

  // fourth-power residual sums, bare and weighted by xi^2 and xi^4
  double m4 = 0.0, mx2 = 0.0, mx4 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double e2 = fit.residuals[i] * fit.residuals[i];
    double e4 = e2 * e2;
    double xi = 0.0;
    for (std::size_t k = 0; k < fit.active_set.size(); ++k)
      xi += G(static_cast<Eigen::Index>(k)) * problem.X(i, fit.active_set[k]);
    double xi2 = xi * xi;
    m4 += e4;
    mx2 += xi2 * e4;
    mx4 += xi2 * xi2 * e4;
  }
  m4 /= n;
  mx2 /= n;
  mx4 /= n;

  const double s2 = bundle.sigma_check_sq;
  const double st = bundle.Sigma_tilde(0, 0);
  if (!(s2 > 0.0) || !(st > 0.0))
    throw std::invalid_argument("correction_coefficients: degenerate pivot scales");
  const double ratio = dist.fourth_ratio();

  CorrectionCoefficients out;
  out.omega2 = (m4 / (s2 * s2) - mx2 / (s2 * st)) * (ratio - 2.0);
  out.omega4 = mx4 / (st * st) * (ratio - 1.0) + 4.0 * mx2 / (s2 * st) * (ratio - 2.0) -
               3.0 * m4 / (s2 * s2) * (ratio - 2.0) + 1.0;
  return out;
}

double correction_polynomial(const CorrectionCoefficients& coeffs, double x, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("correction_polynomial: sample size must be positive");
  return -x / static_cast<double>(n) *
         (coeffs.omega2 / 2.0 + coeffs.omega4 / 24.0 * (x * x - 3.0));
}

double correction_term(const PivotBundle& bundle, const Fit& fit,
                       const RegressionProblem& problem, const ContrastMatrix& D,
                       const WeightDistribution& dist, double x) {
  return correction_polynomial(correction_coefficients(bundle, fit, problem, D, dist), x,
                               problem.n());
}

ConfidenceInterval interval_from_pivots(const std::vector<double>& pivots, double level,
                                        IntervalKind kind, double theta_hat, double center,
                                        double scale, std::optional<double> correction) {
  require_level(level);
  if (pivots.empty()) throw std::invalid_argument("interval_from_pivots: no pivots");
  if (!(scale >= 0.0)) throw std::invalid_argument("interval_from_pivots: negative scale");
  if (correction.has_value() != (kind == IntervalKind::SymmetricPerturbCorrected))
    throw std::invalid_argument(
        "interval_from_pivots: correction is required for the corrected kind and "
        "forbidden otherwise");

  ConfidenceInterval ci;
  ci.level = level;
  ci.kind = kind;
  ci.theta_hat = theta_hat;

  const double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case IntervalKind::OneSidedLower:
      ci.lower = center - boot_quantile(pivots, level) * scale;
      ci.upper = inf;
      break;
    case IntervalKind::OneSidedUpper:
      ci.lower = -inf;
      ci.upper = center - boot_quantile(pivots, 1.0 - level) * scale;
      break;
    case IntervalKind::SymmetricResidual:
    case IntervalKind::SymmetricPerturbCorrected:
    case IntervalKind::SymmetricPerturbUncorrected: {
      double h = boot_quantile_symmetric(pivots, 1.0 - level);
      if (correction.has_value()) {
        h += *correction;
        ci.correction_applied = *correction;
      }
      h = std::max(h, 0.0);
      ci.lower = center - h * scale;
      ci.upper = center + h * scale;
      break;
    }
  }
  return ci;
}

ConfidenceInterval symmetric_ci(const BootstrapRun& run, const PivotBundle& bundle,
                                const Fit& fit, const RegressionProblem& problem,
                                const ContrastMatrix& D, double level, IntervalKind kind) {
  require_level(level);
  require_scalar_contrast(bundle, D);

  const bool perturbation = std::holds_alternative<PerturbationMethod>(run.method);
  if (kind == IntervalKind::SymmetricResidual && perturbation)
    throw std::invalid_argument("symmetric_ci: residual interval requested on a "
                                "perturbation bootstrap run");
  if ((kind == IntervalKind::SymmetricPerturbCorrected ||
       kind == IntervalKind::SymmetricPerturbUncorrected) &&
      !perturbation)
    throw std::invalid_argument("symmetric_ci: perturbation interval requested on a "
                                "residual bootstrap run");

  PivotKind pk = paired_pivot_kind(bundle.class_tag, perturbation);
  std::vector<double> pivots;
  pivots.reserve(run.replicates.size());
  for (const auto& rep : run.replicates) {
    auto value = bootstrap_pivot(rep, fit, problem, D, pk, bundle);
    if (value.has_value()) pivots.push_back((*value)[0]);
  }
  if (pivots.size() < 20)
    throw std::invalid_argument("symmetric_ci: needs at least 20 usable bootstrap "
                                "replicates, got " + std::to_string(pivots.size()));

  const double n = static_cast<double>(problem.n());
  const double theta_hat = (D.D * fit.beta)(0, 0);
  double center = theta_hat;
  if (bundle.class_tag == EstimatorClass::III)
    center -= (*bundle.bias)[0] / std::sqrt(n);
  else if (bundle.class_tag == EstimatorClass::II)
    center += (*bundle.bias)[0] / std::sqrt(n);

  double scale;
  if (perturbation)
    scale = std::sqrt(bundle.sigma_check_sq * bundle.Sigma_hat(0, 0) / n);
  else
    scale = std::sqrt(bundle.sigma_hat_sq / n);

  std::optional<double> correction;
  if (kind == IntervalKind::SymmetricPerturbCorrected) {
    const auto& dist = std::get<PerturbationMethod>(run.method).dist;
    double z = normal_icdf(1.0 - (1.0 - level) / 2.0);
    correction = correction_term(bundle, fit, problem, D, dist, z);
  }
  return interval_from_pivots(pivots, level, kind, theta_hat, center, scale, correction);
}

} // namespace penboot
