#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

// Core data types: regression problems, penalty specifications, fits and
// Gram-matrix partitions.  Everything here is immutable after construction
// and safe to share across threads.

namespace penboot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Coefficients with magnitude above this count as active.  Coordinate
// descent produces exact zeros for l1-type updates, so the tolerance only
// guards float noise.
constexpr double kActiveZeroTol = 1e-10;

struct RegressionProblem {
  MatrixXd X;                       // n x p design, column order as loaded
  VectorXd y;                       // length n response
  std::vector<std::string> names;   // predictor names; empty for synthetic data
  std::string response_name;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
};

// Initial estimator used by the weighted families.
struct OlsInitial {};
struct LassoInitial {
  double lambda;                    // total-penalty scale, see LassoPenalty
};
using InitialEstimator = std::variant<OlsInitial, LassoInitial>;

// Penalty families.  The fitted objective is always
//     sum_i (y_i - x_i' t)^2  +  n * sum_j P_{lambda,j}(|t_j|),
// so each family's documentation states its effective total penalty.

struct LassoPenalty {
  // P(t) = (lambda/n) t, effective total penalty lambda * sum_j |t_j|.
  double lambda;
};

struct ScadPenalty {
  // P'(t) = lambda 1(t <= lambda) + (a lambda - t)_+ / (a-1) 1(t > lambda),
  // applied at strength n (effective lambda is n times the Lasso scale).
  double lambda;
  double a = 3.7;                   // requires a > 2
};

struct McpPenalty {
  // P'(t) = (lambda - t/a)_+, applied at strength n.
  double lambda;
  double a = 3.0;                   // requires a > 1
};

struct AdaptiveLassoPenalty {
  // Weighted l1 with w_j = lambda / |initial_j|^gamma, total weight n * w_j.
  double lambda;
  double gamma = 1.0;               // requires gamma > 0
  InitialEstimator initial = OlsInitial{};
};

// Bases for the one-step family: the fitted penalty linearizes the base
// at the initial estimate, P(|t_j|) = Pbase'(|initial_j|) |t_j|.
struct ScadBase {
  double a = 3.7;
};
struct McpBase {
  double a = 3.0;
};
struct PowerBase {
  double q;                         // P(theta) = theta^q, 0 < q < 1
};
struct LogBase {};                  // P(theta) = log(theta)
using OneStepBase = std::variant<ScadBase, McpBase, PowerBase, LogBase>;

struct OneStepPenalty {
  double lambda;
  OneStepBase base = ScadBase{};
  InitialEstimator initial = OlsInitial{};
};

struct PostSelectionOls {
  // OLS restricted to the support of a Lasso fit at selector_lambda.
  double selector_lambda;
};

using PenaltySpec = std::variant<LassoPenalty, ScadPenalty, McpPenalty,
                                 AdaptiveLassoPenalty, OneStepPenalty,
                                 PostSelectionOls>;

// Throws std::invalid_argument when a parameter is out of its admissible
// range (lambda < 0, SCAD a <= 2, MCP a <= 1, gamma <= 0, q outside (0,1)).
void validate(const PenaltySpec& spec);

// Inference route of a family.
//   I   : oracle behavior needs no bias handling (SCAD, MCP, one-step with
//         SCAD/MCP base, post-selection OLS).
//   II  : weights come from an initial estimate and leave a first-order bias
//         built from the weight derivative (adaptive lasso, one-step with
//         power or log base).
//   III : soft-thresholding bias proportional to lambda (Lasso).
enum class EstimatorClass { I, II, III };

EstimatorClass estimator_class(const PenaltySpec& spec);

// Whether the family needs an initial estimate to define its weights.
bool needs_initial(const PenaltySpec& spec);

struct Fit {
  VectorXd beta;
  std::vector<int> active_set;      // sorted 0-based indices
  VectorXd fitted;
  VectorXd residuals;
  PenaltySpec penalty;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = true;
  // Initial estimate for the weighted families, absent otherwise.
  std::optional<VectorXd> initial_beta;
  // Set when a non-convex univariate update was replaced by its local
  // linear approximation because the curvature check failed.
  bool lla_fallback = false;
};

std::vector<int> active_set_of(const VectorXd& beta, double tol = kActiveZeroTol);

// q x p matrix of linear contrasts of beta.
struct ContrastMatrix {
  MatrixXd D;
  int q() const { return static_cast<int>(D.rows()); }
};

// Columns of D at the active indices in sorted order.  Active sets are kept
// as sorted index lists; any "leading block" convention is realized through
// this permutation bookkeeping, never by reordering design columns.
MatrixXd contrast_active(const ContrastMatrix& D, const std::vector<int>& active);

// Blocks of C = n^{-1} X'X split by active / inactive coordinates, both in
// sorted index order.
struct GramPartition {
  MatrixXd C11;                     // active x active
  MatrixXd C12;                     // active x inactive
  MatrixXd C21;                     // inactive x active
  MatrixXd C22;                     // inactive x inactive
};

GramPartition gram_partition(const RegressionProblem& problem,
                             const std::vector<int>& active);

} // namespace penboot
