#pragma once

#include <optional>
#include <vector>

#include "penboot/bootstrap.hpp"
#include "penboot/pivots.hpp"
#include "penboot/weights.hpp"

namespace penboot {

enum class IntervalKind {
  OneSidedLower,
  OneSidedUpper,
  SymmetricResidual,
  SymmetricPerturbCorrected,
  SymmetricPerturbUncorrected,
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  IntervalKind kind = IntervalKind::SymmetricResidual;
  double theta_hat = 0.0;
  std::optional<double> correction_applied;
};

// The pivot family an estimator class pairs with under each bootstrap scheme:
// plain studentized for class I, bias-restored for class II, bias-corrected
// for class III, each with a residual and a perturbation variant.
PivotKind paired_pivot_kind(EstimatorClass cls, bool perturbation);

// Empirical inf-quantile at the given level: the smallest order statistic x
// with empirical CDF(x) >= level. No interpolation.
double boot_quantile(const std::vector<double>& pivots, double level);

// Quantile of the absolute pivots at level 1 - alpha, i.e. the
// ceil((1-alpha)*B)-th order statistic of |pivots|.
double boot_quantile_symmetric(const std::vector<double>& pivots, double alpha);

// Coefficients of the symmetric perturbation quantile correction. Both are
// built from fourth-power residual sums weighted by powers of the projected
// regressors, together with the fourth-moment ratio of the multiplier law.
struct CorrectionCoefficients {
  double omega2 = 0.0;
  double omega4 = 0.0;
};

CorrectionCoefficients correction_coefficients(const PivotBundle& bundle, const Fit& fit,
                                               const RegressionProblem& problem,
                                               const ContrastMatrix& D,
                                               const WeightDistribution& dist);

// -x/n * [omega2/2 + omega4/24 * (x^2 - 3)], odd in x.
double correction_polynomial(const CorrectionCoefficients& coeffs, double x, Eigen::Index n);

double correction_term(const PivotBundle& bundle, const Fit& fit,
                       const RegressionProblem& problem, const ContrastMatrix& D,
                       const WeightDistribution& dist, double x);

// Inverts {|pivot| <= h} (or the one-sided analogue) around the given center
// with the given scale. `correction` is added to the symmetric quantile for
// the corrected perturbation kind and must be present exactly then.
ConfidenceInterval interval_from_pivots(const std::vector<double>& pivots, double level,
                                        IntervalKind kind, double theta_hat, double center,
                                        double scale,
                                        std::optional<double> correction = std::nullopt);

// Full pipeline over a completed bootstrap run: evaluates the paired pivot on
// every replicate, takes the matching quantile, and maps it back to the theta
// scale. Requires a scalar contrast and at least 20 usable replicates.
ConfidenceInterval symmetric_ci(const BootstrapRun& run, const PivotBundle& bundle,
                                const Fit& fit, const RegressionProblem& problem,
                                const ContrastMatrix& D, double level, IntervalKind kind);

} // namespace penboot
