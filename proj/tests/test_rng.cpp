#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "penboot/rng.hpp"

using namespace penboot;

namespace {

// Independent root-finder for the normal quantile: bisection on the CDF.
// Reduced to the lower tail so the erfc evaluation keeps relative precision.
double icdf_bisect(double p) {
  if (p > 0.5) return -icdf_bisect(1.0 - p);
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Moments {
  double mean, var;
};

template <typename F>
Moments sample_moments(F&& draw, int n) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = draw();
    s += x;
    s2 += x * x;
  }
  double m = s / n;
  return {m, s2 / n - m * m};
}

} // namespace

TEST_CASE("seed derivation reproduces the splitmix64 reference stream") {
  // First outputs of splitmix64 seeded at 0 and a couple of spot values.
  CHECK(derive_seed(0, 0) == 0xe220a8397b1dcdafULL);
  CHECK(derive_seed(0, 1) == 0x6e789e6aa1b965f4ULL);
  CHECK(derive_seed(42, 0) == 0xbdd732262feb6e95ULL);
  CHECK(derive_seed(0xDEADBEEFULL, 7) == 0xb30a4ccf430b1b5aULL);
}

TEST_CASE("derived streams are reproducible and distinct") {
  Rng a(derive_seed(99, 3)), b(derive_seed(99, 3)), c(derive_seed(99, 4));
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    auto va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("normal quantile matches a bisection oracle") {
  const double ps[] = {1e-12, 1e-9,  1e-6,  1e-3,  0.02425, 0.0243, 0.25,
                       0.5,   0.75,  0.9757, 0.999, 1 - 1e-6, 1 - 1e-9};
  for (double p : ps) {
    double ref = icdf_bisect(p);
    CHECK(std::fabs(normal_icdf(p) - ref) <= 1e-9);
    // and the CDF inverts it back
    CHECK(normal_cdf(normal_icdf(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(normal_icdf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(normal_icdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-11));
}

TEST_CASE("uniform stays in [0,1) and has the right first moments") {
  Rng rng(derive_seed(7, 0));
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  // 5 standard errors around 1/2 and 1/3
  CHECK(std::fabs(s / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::fabs(s2 / n - 1.0 / 3.0) < 5.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST_CASE("samplers reproduce their theoretical moments") {
  const int n = 200000;

  SUBCASE("normal") {
    Rng rng(derive_seed(11, 0));
    auto m = sample_moments([&] { return rng.normal(); }, n);
    CHECK(std::fabs(m.mean) < 5.0 / std::sqrt(double(n)));
    CHECK(std::fabs(m.var - 1.0) < 5.0 * std::sqrt(2.0 / n));
  }

  SUBCASE("gamma, shape above one") {
    Rng rng(derive_seed(11, 1));
    auto m = sample_moments([&] { return rng.gamma(2.5, 1.5); }, n);
    // mean k*s, var k*s^2; SE of the sample variance uses the 4th moment
    CHECK(std::fabs(m.mean - 3.75) < 5.0 * std::sqrt(5.625 / n));
    CHECK(std::fabs(m.var - 5.625) < 5.0 * std::sqrt((3.0 + 6.0 / 2.5) * 5.625 * 5.625 / n));
  }

  SUBCASE("gamma, tiny shape") {
    Rng rng(derive_seed(11, 2));
    auto m = sample_moments([&] { return rng.gamma(0.05, 2.0); }, n);
    CHECK(std::fabs(m.mean - 0.1) < 5.0 * std::sqrt(0.2 / n));
  }

  SUBCASE("beta") {
    Rng rng(derive_seed(11, 3));
    auto m = sample_moments([&] { return rng.beta(0.5, 1.5); }, n);
    CHECK(std::fabs(m.mean - 0.25) < 5.0 * std::sqrt(0.0625 / n));
    CHECK(std::fabs(m.var - 0.0625) < 0.003);
  }

  SUBCASE("beta, both shapes tiny") {
    Rng rng(derive_seed(11, 4));
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = rng.beta(0.03649, 0.03649);
      REQUIRE(std::isfinite(x));
      REQUIRE(x >= 0.0);
      REQUIRE(x <= 1.0);
      s += x;
    }
    double var = 1.0 / (4.0 * (2.0 * 0.03649 + 1.0));
    CHECK(std::fabs(s / n - 0.5) < 5.0 * std::sqrt(var / n));
  }

  SUBCASE("exponential") {
    Rng rng(derive_seed(11, 5));
    auto m = sample_moments([&] { return rng.exponential(0.7); }, n);
    CHECK(std::fabs(m.mean - 0.7) < 5.0 * std::sqrt(0.49 / n));
    CHECK(std::fabs(m.var - 0.49) < 5.0 * std::sqrt(8.0 * std::pow(0.7, 4) / n));
  }

  SUBCASE("inverse gamma") {
    Rng rng(derive_seed(11, 6));
    auto m = sample_moments([&] { return rng.inv_gamma(6.0, 6.0); }, n);
    CHECK(std::fabs(m.mean - 1.2) < 5.0 * std::sqrt(0.36 / n));
  }

  SUBCASE("chi squared, fractional df") {
    Rng rng(derive_seed(11, 7));
    auto m = sample_moments([&] { return rng.chi_sq(0.2); }, n);
    CHECK(std::fabs(m.mean - 0.2) < 5.0 * std::sqrt(0.4 / n));
  }
}

TEST_CASE("resampling index is uniform over the range") {
  Rng rng(derive_seed(21, 0));
  const int n = 100000, k = 10;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    std::size_t j = rng.index(k);
    REQUIRE(j < std::size_t(k));
    ++counts[j];
  }
  double expect = double(n) / k;
  double sd = std::sqrt(n * (1.0 / k) * (1.0 - 1.0 / k));
  for (int c : counts) CHECK(std::fabs(c - expect) < 5.0 * sd);
}
