#pragma once

#include <cstdint>
#include <random>

// Seeding and sampling.  Every random quantity in the library flows through
// Rng so that a run is reproducible from a single master seed across
// platforms and thread counts.  Child seeds are derived, never consumed from
// a shared stream, which keeps replicate i identical no matter how the work
// is scheduled.

namespace penboot {

// One step of the splitmix64 finalizer.  Used both as a stand-alone mixer
// and to derive child seeds.
std::uint64_t splitmix64_mix(std::uint64_t z);

// Child seed for slot `index` under `master`.  Equivalent to running a
// splitmix64 generator seeded at `master` and taking output `index`, so
// distinct slots give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Standard normal quantile function.  Rational approximation refined with
// one Halley step against erfc, absolute error well under 1e-9 over (0,1).
double normal_icdf(double p);

// Standard normal distribution function, via erfc.
double normal_cdf(double x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform();

  // Standard normal via the inverse CDF applied to an open-interval uniform.
  double normal();

  // Gamma(shape, scale), Marsaglia-Tsang squeeze; shape < 1 handled by the
  // boost G(k) = G(k+1) * U^(1/k).
  double gamma(double shape, double scale);

  // log of a Gamma(shape, 1) draw.  Stays finite for very small shapes where
  // the draw itself would underflow, which the beta sampler relies on.
  double gamma_log(double shape);

  // Beta(a, b) as a ratio of gammas, computed in log space.
  double beta(double a, double b);

  // Exponential with the given mean.
  double exponential(double mean);

  // scale / Gamma(shape, 1); with scale = shape this is the InvGamma(a, a)
  // parameterization whose mean is a / (a - 1).
  double inv_gamma(double shape, double scale);

  // Chi-squared with df degrees of freedom (df need not be an integer).
  double chi_sq(double df);

  // Index uniform on {0, ..., n-1} by inverse CDF, for resampling.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 eng_;
};

} // namespace penboot
