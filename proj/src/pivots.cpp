#include "penboot/pivots.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "penboot/penalties.hpp"

namespace penboot {

namespace {

int sample_size(const Fit& fit) { return static_cast<int>(fit.residuals.size()); }

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Design block at the active coordinates, n x p0.
MatrixXd active_columns(const RegressionProblem& problem, const std::vector<int>& active) {
  MatrixXd X1(problem.n(), active.size());
  for (std::size_t k = 0; k < active.size(); ++k) X1.col(k) = problem.X.col(active[k]);
  return X1;
}

// D^(1) C11^{-1} for the given active set, rejecting a singular block.
MatrixXd contrast_gram_inverse(const RegressionProblem& problem, const ContrastMatrix& D,
                               const std::vector<int>& active, const char* caller) {
  if (active.empty())
    throw std::invalid_argument(std::string(caller) + ": empty active set");
  GramPartition part = gram_partition(problem, active);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(part.C11);
  double max_ev = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, max_ev))
    throw std::invalid_argument(std::string(caller) +
                                ": active Gram block is numerically singular");
  MatrixXd D1 = contrast_active(D, active);
  return part.C11.ldlt().solve(D1.transpose()).transpose();
}

} // namespace

VectorXd t_statistic(const Fit& fit, const VectorXd& beta_ref, const ContrastMatrix& D) {
  if (beta_ref.size() != fit.beta.size() || D.D.cols() != fit.beta.size())
    throw std::invalid_argument("t_statistic: dimension mismatch");
  double root_n = std::sqrt(static_cast<double>(sample_size(fit)));
  return root_n * (D.D * (fit.beta - beta_ref));
}

MatrixXd inv_sqrt_sym(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  const auto& ev = es.eigenvalues();
  double max_ev = ev.maxCoeff();
  if (ev.minCoeff() <= 1e-12 * std::max(1.0, max_ev))
    throw std::invalid_argument("inv_sqrt_sym: matrix is numerically singular");
  VectorXd inv_root = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

VectorXd bias_lasso(const Fit& fit, const RegressionProblem& problem,
                    const ContrastMatrix& D, double lambda) {
  MatrixXd G = contrast_gram_inverse(problem, D, fit.active_set, "bias_lasso");
  VectorXd s(fit.active_set.size());
  for (std::size_t k = 0; k < fit.active_set.size(); ++k)
    s[k] = sgn(fit.beta[fit.active_set[k]]);
  double n = problem.n();
  return -(lambda / (2.0 * std::sqrt(n))) * (G * s);
}

VectorXd bias_class2(const Fit& fit, const RegressionProblem& problem,
                     const ContrastMatrix& D, const PenaltySpec& spec,
                     const VectorXd& initial_beta) {
  if (estimator_class(spec) != EstimatorClass::II)
    throw std::invalid_argument("bias_class2: spec is not a class-II family");
  MatrixXd G = contrast_gram_inverse(problem, D, fit.active_set, "bias_class2");
  double root_n = std::sqrt(static_cast<double>(problem.n()));
  VectorXd s(fit.active_set.size());
  for (std::size_t k = 0; k < fit.active_set.size(); ++k) {
    int j = fit.active_set[k];
    double w = penalty_derivative(spec, std::abs(initial_beta[j]), std::abs(initial_beta[j]));
    s[k] = root_n * w * sgn(fit.beta[j]);
  }
  return G * s;
}

PivotBundle pivot_bundle(const Fit& fit, const RegressionProblem& problem,
                         const ContrastMatrix& D, EstimatorClass class_tag,
                         const VectorXd& beta_ref) {
  if (estimator_class(fit.penalty) != class_tag)
    throw std::invalid_argument("pivot_bundle: class tag does not match the fitted family");

  const int n = problem.n();
  PivotBundle bundle;
  bundle.class_tag = class_tag;
  bundle.t_n = t_statistic(fit, beta_ref, D);

  double mean_eps = fit.residuals.mean();
  double hat = 0.0, check = 0.0;
  for (int i = 0; i < n; ++i) {
    double e = fit.residuals[i];
    hat += (e - mean_eps) * (e - mean_eps);
    check += e * e;
  }
  bundle.sigma_hat_sq = hat / n;
  bundle.sigma_check_sq = check / n;

  MatrixXd G = contrast_gram_inverse(problem, D, fit.active_set, "pivot_bundle");
  MatrixXd X1 = active_columns(problem, fit.active_set);
  const int q = D.q();
  bundle.Sigma_hat = MatrixXd::Zero(q, q);
  bundle.Sigma_tilde = MatrixXd::Zero(q, q);
  for (int i = 0; i < n; ++i) {
    VectorXd xi = G * X1.row(i).transpose();
    MatrixXd outer = xi * xi.transpose();
    bundle.Sigma_hat += outer;
    bundle.Sigma_tilde += outer * (fit.residuals[i] * fit.residuals[i]);
  }
  bundle.Sigma_hat /= n;
  bundle.Sigma_tilde /= n;

  if (class_tag == EstimatorClass::III) {
    bundle.bias = bias_lasso(fit, problem, D, std::get<LassoPenalty>(fit.penalty).lambda);
  } else if (class_tag == EstimatorClass::II) {
    if (!fit.initial_beta)
      throw std::invalid_argument("pivot_bundle: class-II fit lacks its initial estimate");
    bundle.bias = bias_class2(fit, problem, D, fit.penalty, *fit.initial_beta);
  }
  return bundle;
}

namespace {

bool is_perturbation_kind(PivotKind kind) {
  return kind == PivotKind::Rcheck || kind == PivotKind::Rtilde || kind == PivotKind::Rddot;
}

void check_kind(const PivotBundle& bundle, PivotKind kind, const char* caller) {
  bool breve_tilde = kind == PivotKind::Rbreve || kind == PivotKind::Rtilde;
  bool dot = kind == PivotKind::Rdot || kind == PivotKind::Rddot;
  if (breve_tilde && bundle.class_tag != EstimatorClass::III)
    throw std::invalid_argument(std::string(caller) +
                                ": bias-subtracted kinds require a class-III bundle");
  if (dot && bundle.class_tag != EstimatorClass::II)
    throw std::invalid_argument(std::string(caller) +
                                ": bias-added kinds require a class-II bundle");
  if ((breve_tilde || dot) && !bundle.bias)
    throw std::invalid_argument(std::string(caller) + ": bundle has no bias term");
}

} // namespace

VectorXd studentize(const PivotBundle& bundle, PivotKind kind) {
  check_kind(bundle, kind, "studentize");

  VectorXd numer = bundle.t_n;
  if (kind == PivotKind::Rbreve || kind == PivotKind::Rtilde) numer -= *bundle.bias;
  if (kind == PivotKind::Rdot || kind == PivotKind::Rddot) numer += *bundle.bias;

  if (kind == PivotKind::R || kind == PivotKind::Rbreve || kind == PivotKind::Rdot) {
    if (!(bundle.sigma_hat_sq > 0.0))
      throw std::invalid_argument("studentize: sigma_hat is zero");
    return numer / std::sqrt(bundle.sigma_hat_sq);
  }
  if (!(bundle.sigma_check_sq > 0.0))
    throw std::invalid_argument("studentize: sigma_check is zero");
  return inv_sqrt_sym(bundle.Sigma_hat) * numer / std::sqrt(bundle.sigma_check_sq);
}

std::optional<VectorXd> bootstrap_pivot(const Replicate& replicate, const Fit& fit,
                                        const RegressionProblem& problem,
                                        const ContrastMatrix& D, PivotKind kind,
                                        const PivotBundle& bundle) {
  check_kind(bundle, kind, "bootstrap_pivot");
  if (replicate.from_perturbation != is_perturbation_kind(kind))
    throw std::invalid_argument("bootstrap_pivot: replicate method does not match the kind");
  if (!replicate.ok) return std::nullopt;
  if (!(replicate.residual_scale > 0.0)) return std::nullopt;

  double root_n = std::sqrt(static_cast<double>(problem.n()));
  VectorXd t_star = root_n * (D.D * (replicate.beta_star - fit.beta));

  if (kind == PivotKind::Rbreve || kind == PivotKind::Rtilde) t_star -= *bundle.bias;
  if (kind == PivotKind::Rdot || kind == PivotKind::Rddot) {
    // replicate bias from its own active set, signs and initial estimate
    if (!replicate.initial_star)
      throw std::invalid_argument("bootstrap_pivot: replicate lacks an initial estimate");
    Fit star;
    star.beta = replicate.beta_star;
    star.active_set = replicate.active_star;
    if (star.active_set.empty()) return std::nullopt;
    t_star += bias_class2(star, problem, D, fit.penalty, *replicate.initial_star);
  }

  if (!is_perturbation_kind(kind)) return t_star / replicate.residual_scale;
  return (std::sqrt(bundle.sigma_check_sq) / replicate.residual_scale) *
         (inv_sqrt_sym(bundle.Sigma_tilde) * t_star);
}

} // namespace penboot
