#pragma once

#include <cstdint>
#include <variant>

#include "penboot/model.hpp"

namespace penboot {

// Design families for synthetic experiments. Toeplitz draws rows from a
// Gaussian with covariance rho^|j-k|; rho = 0 degenerates to independent
// columns.
struct IIDGaussianDesign {};
struct ToeplitzDesign {
  double rho = 0.0;
};
using DesignKind = std::variant<IIDGaussianDesign, ToeplitzDesign>;

// Mean-zero error laws, all with finite eighth moments.
struct GaussianError {
  double sigma = 1.0;
};
struct CenteredChiSq {
  double df = 1.0;
};
struct CenteredExp {
  double rate = 1.0;
};
using ErrorDist = std::variant<GaussianError, CenteredChiSq, CenteredExp>;

struct DGPSpec {
  int n = 100;
  int p = 10;
  int p0 = 3;
  VectorXd beta_active;  // length p0, the nonzero leading block of beta
  DesignKind design = IIDGaussianDesign{};
  bool standardize = true;  // rescale columns to mean square 1
  ErrorDist error_dist = GaussianError{};
  std::uint64_t seed = 0;
  // When set, each repetition draws a fresh design instead of reusing the
  // one derived from `seed`. The default matches a fixed, non-random design.
  bool redraw_design = false;
};

void validate(const DGPSpec& dgp);

// Standard deviation implied by the error law.
double error_sd(const ErrorDist& dist);

// The full p-vector: beta_active followed by zeros.
VectorXd full_beta(const DGPSpec& dgp);

struct Dataset {
  RegressionProblem problem;
  VectorXd beta_true;
  VectorXd errors;
};

MatrixXd generate_design(const DGPSpec& dgp, std::uint64_t seed);
VectorXd generate_errors(const ErrorDist& dist, int n, std::uint64_t seed);

// Fixed-design form: the caller draws the design once per experiment and
// passes it to every repetition.
Dataset generate_dataset(const DGPSpec& dgp, const MatrixXd& design, std::uint64_t rep_seed);

// Convenience form deriving the design seed from the spec (or from the rep
// seed when redraw_design is set).
Dataset generate_dataset(const DGPSpec& dgp, std::uint64_t rep_seed);

} // namespace penboot
