#include "penboot/dgp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "penboot/rng.hpp"

namespace penboot {

void validate(const DGPSpec& dgp) {
  if (dgp.n < 1) throw std::invalid_argument("dgp: sample size must be positive");
  if (dgp.p < 1) throw std::invalid_argument("dgp: dimension must be positive");
  if (dgp.p0 < 0 || dgp.p0 > dgp.p)
    throw std::invalid_argument("dgp: active size must lie in [0, p]");
  if (dgp.p > dgp.n)
    throw std::invalid_argument("dgp: p may not exceed n (least-squares pipelines)");
  if (dgp.beta_active.size() != dgp.p0)
    throw std::invalid_argument("dgp: beta_active must have length p0");
  if (const auto* t = std::get_if<ToeplitzDesign>(&dgp.design)) {
    if (!(t->rho > -1.0 && t->rho < 1.0))
      throw std::invalid_argument("dgp: Toeplitz correlation must lie in (-1, 1)");
  }
  std::visit(
      [](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, GaussianError>) {
          if (!(e.sigma > 0.0)) throw std::invalid_argument("dgp: sigma must be positive");
        } else if constexpr (std::is_same_v<E, CenteredChiSq>) {
          if (!(e.df > 0.0))
            throw std::invalid_argument("dgp: chi-square degrees of freedom must be positive");
        } else {
          if (!(e.rate > 0.0)) throw std::invalid_argument("dgp: rate must be positive");
        }
      },
      dgp.error_dist);
}

double error_sd(const ErrorDist& dist) {
  return std::visit(
      [](const auto& e) -> double {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, GaussianError>) return e.sigma;
        else if constexpr (std::is_same_v<E, CenteredChiSq>) return std::sqrt(2.0 * e.df);
        else return 1.0 / e.rate;
      },
      dist);
}

VectorXd full_beta(const DGPSpec& dgp) {
  VectorXd beta = VectorXd::Zero(dgp.p);
  beta.head(dgp.p0) = dgp.beta_active;
  return beta;
}

MatrixXd generate_design(const DGPSpec& dgp, std::uint64_t seed) {
  validate(dgp);
  Rng rng(seed);
  MatrixXd X(dgp.n, dgp.p);
  for (int i = 0; i < dgp.n; ++i)
    for (int j = 0; j < dgp.p; ++j) X(i, j) = rng.normal();

  if (const auto* t = std::get_if<ToeplitzDesign>(&dgp.design); t && t->rho != 0.0) {
    MatrixXd cov(dgp.p, dgp.p);
    for (int j = 0; j < dgp.p; ++j)
      for (int k = 0; k < dgp.p; ++k) cov(j, k) = std::pow(t->rho, std::abs(j - k));
    Eigen::LLT<MatrixXd> chol(cov);
    if (chol.info() != Eigen::Success)
      throw std::runtime_error("dgp: Toeplitz covariance is not positive definite");
    X = X * chol.matrixL().transpose();
  }

  if (dgp.standardize) {
    for (int j = 0; j < dgp.p; ++j) {
      double ms = X.col(j).squaredNorm() / dgp.n;
      if (!(ms > 0.0))
        throw std::runtime_error("dgp: degenerate design column " + std::to_string(j));
      X.col(j) /= std::sqrt(ms);
    }
  }
  return X;
}

VectorXd generate_errors(const ErrorDist& dist, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_errors: sample count must be positive");
  Rng rng(seed);
  VectorXd eps(n);
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        for (int i = 0; i < n; ++i) {
          if constexpr (std::is_same_v<E, GaussianError>)
            eps[i] = e.sigma * rng.normal();
          else if constexpr (std::is_same_v<E, CenteredChiSq>)
            eps[i] = rng.chi_sq(e.df) - e.df;
          else
            eps[i] = rng.exponential(1.0 / e.rate) - 1.0 / e.rate;
        }
      },
      dist);
  return eps;
}

Dataset generate_dataset(const DGPSpec& dgp, const MatrixXd& design, std::uint64_t rep_seed) {
  validate(dgp);
  if (design.rows() != dgp.n || design.cols() != dgp.p)
    throw std::invalid_argument("generate_dataset: design shape does not match the spec");

  Dataset out;
  out.beta_true = full_beta(dgp);
  out.errors = generate_errors(dgp.error_dist, dgp.n, rep_seed);
  out.problem.X = design;
  out.problem.y = design * out.beta_true + out.errors;
  out.problem.names.reserve(static_cast<std::size_t>(dgp.p));
  for (int j = 0; j < dgp.p; ++j) out.problem.names.push_back("x" + std::to_string(j + 1));
  out.problem.response_name = "y";
  return out;
}

Dataset generate_dataset(const DGPSpec& dgp, std::uint64_t rep_seed) {
  std::uint64_t design_seed =
      dgp.redraw_design ? derive_seed(rep_seed, 1) : derive_seed(dgp.seed, 1);
  return generate_dataset(dgp, generate_design(dgp, design_seed), rep_seed);
}

} // namespace penboot
