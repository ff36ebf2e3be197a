#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "penboot/diagnostics.hpp"
#include "penboot/rng.hpp"

using namespace penboot;

namespace {

std::vector<double> normal_draws(int m, double sd, std::uint64_t seed, double shift = 0.0) {
  Rng rng(seed);
  std::vector<double> out(static_cast<std::size_t>(m));
  for (auto& v : out) v = sd * rng.normal() + shift;
  return out;
}

MatrixXd unit_sigma() { return MatrixXd::Identity(1, 1); }

} // namespace

TEST_CASE("oracle interval probabilities track the normal measure") {
  VectorXd d = VectorXd::Constant(1, 1.0);
  double inf = std::numeric_limits<double>::infinity();

  CHECK(oracle_interval_prob(-inf, 0.0, 2.5, unit_sigma(), d) == doctest::Approx(0.5));
  CHECK(oracle_interval_prob(1.3, 1.3, 1.0, unit_sigma(), d) == 0.0);
  CHECK(oracle_interval_prob(-1.96, 1.96, 1.0, unit_sigma(), d) ==
        doctest::Approx(0.95).epsilon(1e-4));
  CHECK(oracle_interval_prob(-inf, inf, 1.0, unit_sigma(), d) == 1.0);

  // scale composes sigma^2 with the quadratic form: 4 * 0.25 = 1
  MatrixXd quarter = MatrixXd::Constant(1, 1, 0.25);
  CHECK(oracle_interval_prob(-1.0, 1.0, 4.0, quarter, d) ==
        doctest::Approx(2.0 * normal_cdf(1.0) - 1.0).epsilon(1e-12));

  CHECK_THROWS_AS(oracle_interval_prob(1.0, -1.0, 1.0, unit_sigma(), d),
                  std::invalid_argument);
  CHECK_THROWS_AS(oracle_interval_prob(0.0, 1.0, 0.0, unit_sigma(), d),
                  std::invalid_argument);
  CHECK_THROWS_AS(oracle_interval_prob(0.0, 1.0, 1.0, MatrixXd::Identity(2, 2), d),
                  std::invalid_argument);
}

TEST_CASE("delta vanishes for matching samples and saturates under a large shift") {
  auto matched = normal_draws(2000, 1.7, 101);
  double small = delta_from_samples(matched, 1.7);
  CHECK(small >= 0.0);
  CHECK(small <= 0.05);

  auto shifted = normal_draws(2000, 1.7, 102, 17.0);
  double large = delta_from_samples(shifted, 1.7);
  CHECK(large >= 0.99);
  CHECK(large <= 1.0);
}

TEST_CASE("delta lies in the unit interval for arbitrary inputs") {
  Rng rng(103);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> odd(300);
    for (auto& v : odd) v = rng.uniform() * 10.0 - 2.0;
    double d = delta_from_samples(odd, 0.5 + trial);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("a point mass mismatched to the oracle gives delta exactly one") {
  std::vector<double> spike(500, 0.0);
  CHECK(delta_from_samples(spike, 1.0) == 1.0);
}

TEST_CASE("one-sided restriction reproduces the Kolmogorov distance") {
  auto samples = normal_draws(400, 1.0, 104);
  DeltaOptions one;
  one.one_sided_only = true;
  double restricted = delta_from_samples(samples, 1.0, one);

  // direct KS evaluation at the sorted sample points
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double phi = normal_cdf(sorted[i]);
    double hi = (static_cast<double>(i) + 1.0) / 400.0 - phi;
    double lo = phi - static_cast<double>(i) / 400.0;
    ks = std::max({ks, hi, lo});
  }
  CHECK(restricted == doctest::Approx(ks).epsilon(1e-12));

  double full = delta_from_samples(samples, 1.0);
  CHECK(restricted <= full + 1e-15);
}

TEST_CASE("delta is invariant under a joint rescaling") {
  auto samples = normal_draws(600, 1.0, 105);
  double base = delta_from_samples(samples, 1.3);
  auto scaled = samples;
  for (auto& v : scaled) v *= 7.0;
  CHECK(delta_from_samples(scaled, 1.3 * 7.0) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("delta input validation") {
  CHECK_THROWS_AS(delta_from_samples({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(delta_from_samples({1.0}, 0.0), std::invalid_argument);
  DeltaOptions bad;
  bad.grid_points = 1;
  CHECK_THROWS_AS(delta_from_samples({1.0}, 1.0, bad), std::invalid_argument);
}

TEST_CASE("oracle approximation improves with n for post-selection least squares") {
  DGPSpec dgp;
  dgp.p = 10;
  dgp.p0 = 3;
  dgp.beta_active = VectorXd(3);
  dgp.beta_active << 1.6, -1.8, 2.0;
  dgp.error_dist = CenteredChiSq{0.2};  // strong skew so the CLT error is visible
  dgp.seed = 501;

  ContrastMatrix D;
  D.D = MatrixXd::Zero(1, 10);
  D.D(0, 0) = 1.0;

  auto delta_at = [&](int n) {
    PostSelectionOls spec{4.0 * std::pow(static_cast<double>(n), 0.6)};
    return estimate_delta(dgp, spec, D, n, 800, 9001);
  };
  auto small = delta_at(100);
  auto large = delta_at(400);
  CHECK(small.failures == 0);
  CHECK(large.failures == 0);
  CHECK(large.delta < small.delta);

  // the oracle scale follows sigma * sqrt(D C11^{-1} D') for the fixed design
  DGPSpec at100 = dgp;
  at100.n = 100;
  MatrixXd X = generate_design(at100, derive_seed(dgp.seed, 1));
  RegressionProblem shape;
  shape.X = X;
  shape.y = VectorXd::Zero(100);
  auto part = gram_partition(shape, {0, 1, 2});
  MatrixXd D1 = contrast_active(D, {0, 1, 2});
  double expected =
      error_sd(dgp.error_dist) * std::sqrt((D1 * part.C11.ldlt().solve(D1.transpose()))(0, 0));
  CHECK(small.oracle_sd == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("delta estimation is deterministic and guards its inputs") {
  DGPSpec dgp;
  dgp.p = 5;
  dgp.p0 = 2;
  dgp.beta_active = VectorXd(2);
  dgp.beta_active << 2.0, -1.5;
  dgp.seed = 502;

  ContrastMatrix D;
  D.D = MatrixXd::Zero(1, 5);
  D.D(0, 0) = 1.0;

  ScadPenalty spec{0.5, 3.7};
  auto a = estimate_delta(dgp, spec, D, 60, 100, 77);
  auto b = estimate_delta(dgp, spec, D, 60, 100, 77);
  CHECK(a.delta == b.delta);
  CHECK(a.used == 100);

  CHECK_THROWS_AS(estimate_delta(dgp, spec, D, 60, 99, 77), std::invalid_argument);

  auto empty = dgp;
  empty.beta_active.setZero();
  CHECK_THROWS_AS(estimate_delta(empty, spec, D, 60, 100, 77), std::invalid_argument);

  ContrastMatrix wide;
  wide.D = MatrixXd::Identity(2, 5);
  CHECK_THROWS_AS(estimate_delta(dgp, spec, wide, 60, 100, 77), std::invalid_argument);

  SolverConfig starved;
  starved.max_iters = 1;
  starved.coord_tol = 0.0;
  CHECK_THROWS_AS(estimate_delta(dgp, spec, D, 60, 100, 77, starved), std::runtime_error);
}

TEST_CASE("threaded and serial delta estimates agree") {
  DGPSpec dgp;
  dgp.p = 5;
  dgp.p0 = 2;
  dgp.beta_active = VectorXd(2);
  dgp.beta_active << 2.0, -1.5;
  dgp.seed = 503;

  ContrastMatrix D;
  D.D = MatrixXd::Zero(1, 5);
  D.D(0, 0) = 1.0;

  ScadPenalty spec{0.5, 3.7};
  auto serial = estimate_delta(dgp, spec, D, 60, 120, 78, {}, 1);
  auto threaded = estimate_delta(dgp, spec, D, 60, 120, 78, {}, 3);
  CHECK(serial.delta == threaded.delta);
}

TEST_CASE("lasso in the growing-penalty regime does not approach the oracle") {
  DGPSpec dgp;
  dgp.p = 8;
  dgp.p0 = 2;
  dgp.beta_active = VectorXd(2);
  dgp.beta_active << 2.0, -1.5;
  dgp.error_dist = GaussianError{1.0};
  dgp.seed = 504;

  ContrastMatrix D;
  D.D = MatrixXd::Zero(1, 8);
  D.D(0, 0) = 1.0;

  auto delta_at = [&](int n) {
    LassoPenalty spec{std::pow(static_cast<double>(n), 0.6)};
    return estimate_delta(dgp, spec, D, n, 400, 9002).delta;
  };
  double d100 = delta_at(100);
  double d400 = delta_at(400);
  // Monte Carlo slack: DKW 95% half-width at M = 400 is about 0.068
  CHECK(d400 >= d100 - 0.07);
  CHECK(d100 > 0.0);
}
