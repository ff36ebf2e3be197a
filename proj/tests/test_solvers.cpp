#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "penboot/model.hpp"
#include "penboot/penalties.hpp"
#include "penboot/rng.hpp"
#include "penboot/solvers.hpp"
#include "support/reference.hpp"

using namespace penboot;

namespace {

RegressionProblem random_problem(std::uint64_t seed, int n, int p, const VectorXd& beta,
                                 double sigma = 1.0, bool standardize = true) {
  Rng rng(seed);
  RegressionProblem prob;
  prob.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) prob.X(i, j) = rng.normal();
  if (standardize) {
    for (int j = 0; j < p; ++j) {
      double s = std::sqrt(prob.X.col(j).squaredNorm() / n);
      prob.X.col(j) /= s;
    }
  }
  prob.y = prob.X * beta;
  for (int i = 0; i < n; ++i) prob.y[i] += sigma * rng.normal();
  return prob;
}

// 8x4 block of a Hadamard matrix: exactly orthogonal columns with
// n^{-1} X'X = I.
RegressionProblem hadamard_problem(const VectorXd& zbar) {
  const int n = 8, p = 4;
  int H[8][4] = {{1, 1, 1, 1},   {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1},
                 {1, 1, 1, 1},   {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
  // flip the lower half of each column pattern to break the duplication
  for (int i = 4; i < 8; ++i)
    for (int j = 1; j < 4; ++j) H[i][j] = -H[i][j];
  RegressionProblem prob;
  prob.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) prob.X(i, j) = H[i][j];
  // y built so that n^{-1} X'y equals the requested zbar
  prob.y = prob.X * zbar;
  return prob;
}

// Exhaustive univariate search of sum (y - x b)^2 + n P(|b|).
double grid_minimize(const std::function<double(double)>& objective, double lo, double hi) {
  double best = lo, bestv = objective(lo);
  for (double b = lo; b <= hi; b += 1e-4) {
    double v = objective(b);
    if (v < bestv) {
      bestv = v;
      best = b;
    }
  }
  for (double b = best - 2e-4; b <= best + 2e-4; b += 1e-7) {
    double v = objective(b);
    if (v < bestv) {
      bestv = v;
      best = b;
    }
  }
  return best;
}

} // namespace

TEST_CASE("orthogonal design: OLS equals n^{-1} X'y") {
  VectorXd z(4);
  z << 0.5, -1.2, 0.0, 2.0;
  auto prob = hadamard_problem(z);
  auto fit = fit_ols(prob);
  for (int j = 0; j < 4; ++j) CHECK(fit.beta[j] == doctest::Approx(z[j]).epsilon(1e-12));
  // orthogonality sanity
  MatrixXd C = prob.X.transpose() * prob.X / 8.0;
  CHECK(C.isApprox(MatrixXd::Identity(4, 4), 1e-14));
}

TEST_CASE("empty support gives the null model") {
  VectorXd beta(3);
  beta << 1, 2, 3;
  auto prob = random_problem(derive_seed(1, 0), 20, 3, beta);
  auto fit = fit_ols(prob, std::vector<int>{});
  CHECK(fit.beta.isZero(0.0));
  CHECK(fit.residuals.isApprox(prob.y, 1e-15));
  CHECK(fit.active_set.empty());
}

TEST_CASE("OLS matches an independent pivoted elimination oracle") {
  VectorXd beta(5);
  beta << 1.0, -0.5, 0.0, 2.0, 0.3;
  auto prob = random_problem(derive_seed(1, 1), 50, 5, beta);
  auto fit = fit_ols(prob);

  const int p = 5;
  MatrixXd G = prob.X.transpose() * prob.X;
  VectorXd rhs = prob.X.transpose() * prob.y;
  std::vector<double> A(p * p), b(p);
  for (int r = 0; r < p; ++r) {
    b[r] = rhs[r];
    for (int c = 0; c < p; ++c) A[r * p + c] = G(r, c);
  }
  auto ref = refcheck::solve_pivot(A, b);
  for (int j = 0; j < p; ++j) CHECK(fit.beta[j] == doctest::Approx(ref[j]).epsilon(1e-8));

  // normal equations residual contract and the residual-identity invariant
  CHECK((G * fit.beta - rhs).cwiseAbs().maxCoeff() < 1e-10 * rhs.cwiseAbs().maxCoeff());
  VectorXd direct = prob.y - prob.X * fit.beta;
  for (int i = 0; i < prob.n(); ++i)
    CHECK(fit.residuals[i] == doctest::Approx(direct[i]).epsilon(1e-12));
}

TEST_CASE("singular Gram block is rejected with its smallest eigenvalue") {
  RegressionProblem prob;
  prob.X.resize(10, 2);
  Rng rng(derive_seed(1, 2));
  for (int i = 0; i < 10; ++i) {
    prob.X(i, 0) = rng.normal();
    prob.X(i, 1) = 2.0 * prob.X(i, 0);  // exact collinearity
  }
  prob.y = VectorXd::Ones(10);
  try {
    fit_ols(prob);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("smallest eigenvalue") != std::string::npos);
  }
}

TEST_CASE("lasso at lambda = 0 equals OLS") {
  VectorXd beta(4);
  beta << 1.5, 0.0, -2.0, 0.7;
  auto prob = random_problem(derive_seed(2, 0), 40, 4, beta);
  auto ols = fit_ols(prob);
  auto lasso = fit_penalized(prob, LassoPenalty{0.0});
  for (int j = 0; j < 4; ++j) CHECK(lasso.beta[j] == doctest::Approx(ols.beta[j]).epsilon(1e-8));
}

TEST_CASE("orthogonal design: lasso is coordinatewise soft thresholding") {
  VectorXd z(4);
  z << 0.5, -1.2, 0.05, 2.0;
  auto prob = hadamard_problem(z);
  const int n = 8;
  const double lambda = 1.6;
  auto fit = fit_penalized(prob, LassoPenalty{lambda});
  for (int j = 0; j < 4; ++j) {
    double expect = refcheck::soft(z[j], lambda / (2.0 * n));
    CHECK(fit.beta[j] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(fit.kkt_residual <= 1e-8);
}

TEST_CASE("lasso zeroes out at lambda >= 2 ||X'y||_inf") {
  VectorXd beta(3);
  beta << 0.4, -0.2, 0.1;
  auto prob = random_problem(derive_seed(2, 1), 30, 3, beta);
  // independent scalar computation of the threshold
  double big = 0.0;
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 30; ++i) s += prob.X(i, j) * prob.y[i];
    big = std::max(big, std::fabs(s));
  }
  // at exact equality the subgradient condition is tight, so only
  // summation-order rounding can remain
  auto fit = fit_penalized(prob, LassoPenalty{2.0 * big});
  CHECK(fit.beta.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(kkt_residual(prob, LassoPenalty{2.0 * big}, VectorXd::Zero(3)) <= 1e-12 * big);
  // any margin above rounding level gives exact zeros
  auto fit2 = fit_penalized(prob, LassoPenalty{2.0 * big * (1.0 + 1e-10)});
  CHECK(fit2.beta.isZero(0.0));
  CHECK(kkt_residual(prob, LassoPenalty{2.0 * big * 1.1}, VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("lasso satisfies its stationarity contract on random problems") {
  VectorXd beta(6);
  beta << 2.0, -1.0, 0.0, 0.0, 0.5, 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    auto prob = random_problem(derive_seed(3, rep), 60, 6, beta);
    for (double lambda : {0.5, 5.0, 40.0}) {
      auto fit = fit_penalized(prob, LassoPenalty{lambda});
      CHECK(fit.kkt_residual <= 1e-8);
      CHECK(kkt_residual(prob, LassoPenalty{lambda}, fit.beta) <= 1e-8);
    }
  }
}

TEST_CASE("objective is nonincreasing across coordinate-descent sweeps") {
  VectorXd beta(5);
  beta << 1.0, -2.0, 0.0, 0.8, 0.0;
  auto prob = random_problem(derive_seed(3, 100), 40, 5, beta);
  LassoPenalty spec{3.0};

  double prev = penalized_objective(prob, spec, VectorXd::Zero(5));
  double scale = prev;
  for (int k = 1; k <= 30; ++k) {
    SolverConfig cfg;
    cfg.max_iters = k;
    double obj;
    try {
      obj = penalized_objective(prob, spec, fit_penalized(prob, spec, cfg).beta);
      k = 1000;  // converged; final check below then stop
    } catch (const ConvergenceError& e) {
      obj = penalized_objective(prob, spec, e.last_beta);
    }
    CHECK(obj <= prev + 1e-12 * scale);
    prev = obj;
  }
}

TEST_CASE("lasso scaling equivariance in the paired form") {
  VectorXd beta(4);
  beta << 1.0, 0.0, -0.6, 0.2;
  auto prob = random_problem(derive_seed(3, 200), 30, 4, beta);
  const double lambda = 2.5;

  // run both problems for exactly the same number of sweeps so the iterates
  // can be compared bitwise; scaling by 2 is exact in floating point
  SolverConfig cfg;
  cfg.max_iters = 200;
  cfg.coord_tol = 0.0;
  auto run = [&cfg](const RegressionProblem& pr, double lam) -> VectorXd {
    try {
      return fit_penalized(pr, LassoPenalty{lam}, cfg).beta;
    } catch (const ConvergenceError& e) {
      return e.last_beta;
    }
  };
  VectorXd base = run(prob, lambda);
  RegressionProblem scaled = prob;
  scaled.y *= 2.0;
  VectorXd twice = run(scaled, 2.0 * lambda);
  for (int j = 0; j < 4; ++j) CHECK(twice[j] == 2.0 * base[j]);
}

TEST_CASE("non-convergence carries the last iterate and residual") {
  VectorXd beta(5);
  beta << 3.0, -3.0, 2.0, -2.0, 1.0;
  auto prob = random_problem(derive_seed(3, 300), 25, 5, beta, 0.5);
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.coord_tol = 1e-16;
  try {
    fit_penalized(prob, LassoPenalty{0.1}, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_beta.size() == 5);
    CHECK(e.kkt > 0.0);
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
}

namespace {

// Scalar form of the partial objective in coordinate j: with r0 the
// residual excluding x_j b, ||r0 - x_j b||^2 = ||r0||^2 - 2 b x_j'r0 + b^2 S.
struct PartialObjective {
  double rnorm, xr, S, n, lambda, a;
  bool scad;
  double operator()(double b) const {
    double pen = scad ? scad_value(std::fabs(b), lambda, a) : mcp_value(std::fabs(b), lambda, a);
    return rnorm - 2.0 * b * xr + b * b * S + n * pen;
  }
  static PartialObjective at(const RegressionProblem& prob, const VectorXd& beta, int j,
                             double lambda, double a, bool scad) {
    VectorXd r0 = prob.y - prob.X * beta + prob.X.col(j) * beta[j];
    return {r0.squaredNorm(), prob.X.col(j).dot(r0), prob.X.col(j).squaredNorm(),
            double(prob.n()), lambda, a, scad};
  }
};

} // namespace

TEST_CASE("SCAD matches exhaustive search, orthogonal design") {
  // sweep the univariate solution z across all three branches
  const double lambda = 1.0, a = 3.7;
  for (double t : {0.2, 0.5, 0.9, 1.3, 2.2, 3.5, 3.8, 6.0}) {
    VectorXd z(4);
    z << t, -t, t / 2, 0.0;
    auto prob = hadamard_problem(z);
    auto fit = fit_penalized(prob, ScadPenalty{lambda, a});
    for (int j = 0; j < 4; ++j) {
      auto obj = PartialObjective::at(prob, fit.beta, j, lambda, a, true);
      double ref = grid_minimize([&](double b) { return obj(b); }, -8.0, 8.0);
      CHECK(fit.beta[j] == doctest::Approx(ref).epsilon(5e-5));
    }
  }
}

TEST_CASE("MCP matches exhaustive search, orthogonal design") {
  const double lambda = 0.9, a = 3.0;
  for (double t : {0.3, 0.8, 1.5, 2.6, 2.8, 5.0}) {
    VectorXd z(4);
    z << t, -t / 2, 0.0, t;
    auto prob = hadamard_problem(z);
    auto fit = fit_penalized(prob, McpPenalty{lambda, a});
    for (int j = 0; j < 4; ++j) {
      auto obj = PartialObjective::at(prob, fit.beta, j, lambda, a, false);
      double ref = grid_minimize([&](double b) { return obj(b); }, -8.0, 8.0);
      CHECK(fit.beta[j] == doctest::Approx(ref).epsilon(5e-5));
    }
  }
}

TEST_CASE("SCAD/MCP on correlated designs reach coordinatewise stationary points") {
  VectorXd beta(5);
  beta << 2.5, -1.8, 0.0, 0.0, 1.2;
  auto prob = random_problem(derive_seed(4, 0), 80, 5, beta, 0.7);
  for (bool scad : {true, false}) {
    PenaltySpec spec = scad ? PenaltySpec(ScadPenalty{8.0, 3.7}) : PenaltySpec(McpPenalty{8.0, 3.0});
    double a = scad ? 3.7 : 3.0;
    auto fit = fit_penalized(prob, spec);
    CHECK(!fit.lla_fallback);
    // every coordinate is at its univariate minimum given the others
    for (int j = 0; j < 5; ++j) {
      auto obj = PartialObjective::at(prob, fit.beta, j, 8.0, a, scad);
      double here = obj(fit.beta[j]);
      double ref = grid_minimize([&](double b) { return obj(b); }, fit.beta[j] - 3.0,
                                 fit.beta[j] + 3.0);
      CHECK(here <= obj(ref) + 1e-6);
    }
  }
}

TEST_CASE("weak columns trigger the one-step fallback") {
  VectorXd beta(3);
  beta << 2.0, -1.0, 0.5;
  auto prob = random_problem(derive_seed(4, 1), 50, 3, beta, 0.5);
  prob.X *= 0.4;            // normalized Gram diagonal 0.16 < 1/3.7
  prob.y = prob.X * beta;   // keep a well-posed signal
  auto fit = fit_penalized(prob, ScadPenalty{1.0, 3.7});
  CHECK(fit.lla_fallback);
  CHECK(std::holds_alternative<ScadPenalty>(fit.penalty));

  auto surrogate = fit_penalized(prob, OneStepPenalty{1.0, ScadBase{3.7}, OlsInitial{}});
  for (int j = 0; j < 3; ++j) CHECK(fit.beta[j] == doctest::Approx(surrogate.beta[j]).epsilon(1e-12));
}

TEST_CASE("adaptive lasso fits its weighted objective") {
  VectorXd beta(4);
  beta << 3.0, 0.0, -2.0, 0.0;
  auto prob = random_problem(derive_seed(5, 0), 60, 4, beta, 0.5);
  AdaptiveLassoPenalty spec{4.0, 1.0, OlsInitial{}};
  auto fit = fit_penalized(prob, spec);
  REQUIRE(fit.initial_beta.has_value());
  CHECK(fit.kkt_residual <= 1e-8);

  // same fit through the explicit weighted-l1 entry point
  VectorXd v(4);
  for (int j = 0; j < 4; ++j) v[j] = 60.0 * 4.0 / std::fabs((*fit.initial_beta)[j]);
  auto direct = fit_weighted_l1(prob, v);
  for (int j = 0; j < 4; ++j) CHECK(fit.beta[j] == doctest::Approx(direct.beta[j]).epsilon(1e-10));
}

TEST_CASE("adaptive lasso rejects a degenerate OLS initial with guidance") {
  RegressionProblem prob;
  prob.X = MatrixXd::Identity(4, 2) * 2.0;
  prob.y.resize(4);
  prob.y << 1.0, 1e-10, 0.0, 0.0;  // OLS gives (0.5, 5e-11)
  try {
    fit_penalized(prob, AdaptiveLassoPenalty{1.0, 1.0, OlsInitial{}});
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("lasso initial") != std::string::npos);
    CHECK(msg.find("index 1") != std::string::npos);
  }
}

TEST_CASE("lasso-initial structural zeros pin coordinates to zero") {
  VectorXd beta(4);
  beta << 3.0, 0.0, -2.5, 0.0;
  auto prob = random_problem(derive_seed(5, 1), 60, 4, beta, 0.4);
  // a selector lambda strong enough to kill the null coordinates
  auto selector = fit_penalized(prob, LassoPenalty{150.0});
  REQUIRE(selector.active_set.size() < 4);

  AdaptiveLassoPenalty spec{2.0, 1.0, LassoInitial{150.0}};
  auto fit = fit_penalized(prob, spec);
  for (int j = 0; j < 4; ++j)
    if (std::fabs(selector.beta[j]) == 0.0) CHECK(fit.beta[j] == 0.0);
  CHECK(fit.kkt_residual <= 1e-8);
}

TEST_CASE("one-step SCAD frees large initial coefficients from the penalty") {
  VectorXd beta(3);
  beta << 5.0, 0.0, -4.0;
  auto prob = random_problem(derive_seed(5, 2), 70, 3, beta, 0.3);
  OneStepPenalty spec{1.0, ScadBase{3.7}, OlsInitial{}};
  auto fit = fit_penalized(prob, spec);
  auto w = one_step_weights(spec, *fit.initial_beta);
  // large true coefficients produce zero weight, so those coordinates are
  // unpenalized; the whole fit then approaches OLS when all weights vanish
  CHECK(w[0] == 0.0);
  CHECK(w[2] == 0.0);
  CHECK(fit.kkt_residual <= 1e-8);
}

TEST_CASE("post-selection OLS equals least squares on the selected support") {
  VectorXd beta(5);
  beta << 3.0, 0.0, -2.0, 0.0, 1.5;
  auto prob = random_problem(derive_seed(6, 0), 50, 5, beta, 0.5);
  const double sel = 25.0;
  auto fit = fit_penalized(prob, PostSelectionOls{sel});
  auto lasso = fit_penalized(prob, LassoPenalty{sel});
  CHECK(fit.active_set == lasso.active_set);
  auto ols = fit_ols(prob, lasso.active_set);
  for (int j = 0; j < 5; ++j) CHECK(fit.beta[j] == ols.beta[j]);
}

TEST_CASE("kkt_residual grows linearly under a coordinate perturbation") {
  VectorXd beta(5);
  beta << 3.0, -2.0, 0.0, 1.0, 0.0;
  auto prob = random_problem(derive_seed(6, 1), 200, 5, beta, 0.3);
  LassoPenalty spec{8.0};
  auto fit = fit_penalized(prob, spec);
  REQUIRE(fit.kkt_residual <= 1e-8);

  int j = fit.active_set.front();
  REQUIRE(std::fabs(fit.beta[j]) > 0.2);
  VectorXd bumped = fit.beta;
  bumped[j] += 0.1;
  double expect = 2.0 * prob.X.col(j).squaredNorm() * 0.1;
  double got = kkt_residual(prob, spec, bumped);
  CHECK(got == doctest::Approx(expect).epsilon(0.1));
}

TEST_CASE("irrepresentable measure: hand cases and a dense oracle") {
  // block-diagonal: cross block vanishes
  RegressionProblem blockp;
  blockp.X = MatrixXd::Zero(4, 2);
  blockp.X(0, 0) = blockp.X(1, 0) = 1.0;
  blockp.X(2, 1) = blockp.X(3, 1) = 1.0;
  blockp.y = VectorXd::Zero(4);
  VectorXd s1(1);
  s1 << 1.0;
  CHECK(check_irrepresentable(blockp, {0}, s1) == 0.0);

  // 2x2 correlation r: the measure is |r|
  RegressionProblem corr;
  corr.X.resize(4, 2);
  corr.X.col(0) << 1, 1, -1, -1;
  double r = 0.6;
  corr.X.col(1) = r * corr.X.col(0);
  corr.X(0, 1) += std::sqrt(1 - r * r);
  corr.X(1, 1) -= std::sqrt(1 - r * r);
  corr.X(2, 1) += std::sqrt(1 - r * r);
  corr.X(3, 1) -= std::sqrt(1 - r * r);
  // columns have squared norm 4 and inner product 4r, so C = [[1, r],[r, 1]]
  corr.y = VectorXd::Zero(4);
  CHECK(check_irrepresentable(corr, {0}, s1) == doctest::Approx(r).epsilon(1e-12));

  // random design vs an independent pivoted-elimination oracle
  VectorXd beta(6);
  beta << 1, 1, 1, 0, 0, 0;
  auto prob = random_problem(derive_seed(6, 2), 40, 6, beta);
  VectorXd signs(3);
  signs << 1.0, 1.0, 1.0;
  double got = check_irrepresentable(prob, {0, 1, 2}, signs);

  MatrixXd C = prob.X.transpose() * prob.X / 40.0;
  std::vector<double> A(9), b(3);
  for (int rr = 0; rr < 3; ++rr) {
    b[rr] = signs[rr];
    for (int cc = 0; cc < 3; ++cc) A[rr * 3 + cc] = C(rr, cc);
  }
  auto inv_s = refcheck::solve_pivot(A, b);
  double ref = 0.0;
  for (int k = 3; k < 6; ++k) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += C(k, c) * inv_s[c];
    ref = std::max(ref, std::fabs(acc));
  }
  CHECK(got == doctest::Approx(ref).epsilon(1e-10));

  CHECK_THROWS_AS(check_irrepresentable(prob, {}, VectorXd()), std::invalid_argument);
}
