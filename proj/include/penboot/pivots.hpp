#pragma once

#include <optional>

#include "penboot/bootstrap.hpp"
#include "penboot/model.hpp"

// Pivotal quantities for inference on contrasts of the coefficient vector:
// T_n, its variance estimators, studentized and bias-corrected forms, and
// their bootstrap counterparts.  All class-dependent pieces work off the
// fitted active set through the sorted-index partition.

namespace penboot {

// sqrt(n) * D * (beta_hat - beta_ref).
VectorXd t_statistic(const Fit& fit, const VectorXd& beta_ref, const ContrastMatrix& D);

// Symmetric inverse square root by eigendecomposition.  Rejects when the
// smallest eigenvalue falls below 1e-12 times the largest.
MatrixXd inv_sqrt_sym(const MatrixXd& M);

struct PivotBundle {
  VectorXd t_n;
  double sigma_hat_sq = 0.0;    // n^{-1} sum (eps_i - mean eps)^2
  double sigma_check_sq = 0.0;  // n^{-1} sum eps_i^2
  MatrixXd Sigma_hat;           // n^{-1} sum xi_i xi_i'
  MatrixXd Sigma_tilde;         // n^{-1} sum xi_i xi_i' eps_i^2
  std::optional<VectorXd> bias; // b-dagger for the lasso, b-breve for class II
  EstimatorClass class_tag = EstimatorClass::I;
};

// Soft-thresholding bias of the lasso,
//   b = -(lambda / (2 sqrt(n))) D^(1) C11^{-1} sgn(beta_hat)|_active,
// at the fitted active set.  Rejects an empty active set.
VectorXd bias_lasso(const Fit& fit, const RegressionProblem& problem,
                    const ContrastMatrix& D, double lambda);

// First-order bias of the weighted families,
//   b = D^(1) C11^{-1} s,  s_j = sqrt(n) P'_{lambda,j}(|initial_j|) sgn(beta_hat_j),
// over the active coordinates.  Rejects a zero initial coefficient there.
VectorXd bias_class2(const Fit& fit, const RegressionProblem& problem,
                     const ContrastMatrix& D, const PenaltySpec& spec,
                     const VectorXd& initial_beta);

// Assembles every studentization ingredient at beta_ref.  xi_i is built from
// the active-set partition, xi_i = D^(1) C11^{-1} x_i^(1).  The bias slot is
// filled for class II and III fits and left empty for class I.  Rejects an
// empty active set, a singular C11, or a class tag that contradicts the
// fitted family.
PivotBundle pivot_bundle(const Fit& fit, const RegressionProblem& problem,
                         const ContrastMatrix& D, EstimatorClass class_tag,
                         const VectorXd& beta_ref);

// The six pivot forms.  R and Rcheck studentize T directly and are valid for
// any class; Rbreve / Rtilde subtract the lasso bias (class III only); Rdot /
// Rddot add the class-II bias as printed, a convention whose centering is
// pinned down by a dedicated test rather than adjusted here.
enum class PivotKind { R, Rcheck, Rbreve, Rtilde, Rdot, Rddot };

VectorXd studentize(const PivotBundle& bundle, PivotKind kind);

// Bootstrap counterpart of the pivot for one replicate.
//   T* = sqrt(n) D (beta* - beta_hat); residual kinds divide by the
//   replicate's sigma*, perturbation kinds use sigma**^{-1} sigma_check
//   Sigma_tilde^{-1/2}.  The lasso kinds subtract the original fit's bias;
//   the class-II kinds rebuild the bias from the replicate's own active set
//   and initial estimate.  Returns nullopt for a failed replicate or a zero
//   replicate scale.
std::optional<VectorXd> bootstrap_pivot(const Replicate& replicate, const Fit& fit,
                                        const RegressionProblem& problem,
                                        const ContrastMatrix& D, PivotKind kind,
                                        const PivotBundle& bundle);

} // namespace penboot
