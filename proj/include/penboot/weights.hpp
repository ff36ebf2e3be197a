#pragma once

#include <cstdint>
#include <functional>

#include "penboot/model.hpp"

// Multiplier distributions for the perturbation bootstrap.  A usable
// distribution G must satisfy the moment identities
//     Var(G) = mu^2   and   E(G - mu)^3 = mu^3,
// which make the bootstrap third moment track the sampling third moment.
// Four built-ins are provided, plus a Custom escape hatch.

namespace penboot {

class Rng;

enum class WeightKind {
  BetaHalfThreeHalves,   // Beta(1/2, 3/2)
  GammaBetaMixture,      // Gamma(0.008652, scale 2) + Beta(0.036490, 0.036490)
  ExpInvGammaMixture,    // reflected Exponential + InvGamma(a, a), a = 4 + sqrt(11/3)
  GeneralizedGamma,      // Stacy family, (rho, nu) solved from the identities
  Custom,
};

struct WeightDistribution {
  WeightKind kind;
  double mu = 0.0;
  double variance = 0.0;
  double third_central = 0.0;
  double fourth_central = 0.0;
  // Identity residuals within 1e-3 relative.  The built-ins all comply;
  // the mixtures carry ~2e-6 slack because their published parameters are
  // six-decimal truncations of the exact roots.
  bool moments_compliant = false;
  // False for the Exp+InvGamma mixture: its exponential component has a
  // negative mean, realized as a reflected exponential, so the support
  // extends below zero.  The moment identities do not require G >= 0.
  bool nonnegative_support = true;

  // family parameters
  double gg_omega = 0.0, gg_rho = 0.0, gg_nu = 0.0;
  std::function<double(Rng&)> sampler;  // Custom only

  double fourth_ratio() const { return fourth_central / (mu * mu * mu * mu); }
  double identity_residual_var() const { return (variance - mu * mu) / (mu * mu); }
  double identity_residual_third() const { return (third_central - mu * mu * mu) / (mu * mu * mu); }
};

WeightDistribution builtin_beta();
WeightDistribution builtin_gamma_beta();
WeightDistribution builtin_exp_invgamma();
WeightDistribution builtin_generalized_gamma(double omega = 1.0, double tol = 1e-10);
WeightDistribution custom_weights(double mu, double variance, double third_central,
                                  double fourth_central, std::function<double(Rng&)> sampler);

// Distribution by CLI name: "beta", "gammabeta", "expinvgamma", "gg".
WeightDistribution weights_by_name(const std::string& name);

struct GGSolution {
  double rho = 0.0, nu = 0.0;
  double residual1 = 0.0, residual2 = 0.0;  // log-scale equation residuals
};

// Solves  Gamma((rho+2)/nu) Gamma(rho/nu)   = 2 Gamma((rho+1)/nu)^2
//         Gamma((rho+3)/nu) Gamma(rho/nu)^2 = 5 Gamma((rho+1)/nu)^3
// in log space by damped Newton from an 8x8 multi-start grid over
// (1e-3, 50)^2.  The equations involve only moment ratios, so the solution
// does not depend on the scale parameter omega.
GGSolution solve_generalized_gamma(double omega = 1.0, double tol = 1e-10);

struct GBResiduals {
  double r1 = 0.0, r2 = 0.0;
};

// Residuals of the two moment identities for the five-parameter
// generalized beta family.  The scale g cancels from both equations.
GBResiduals check_generalized_beta(double f, double g, double h, double omega, double rho,
                                   double tol = 1e-10);

// Gauss hypergeometric series sum_k (a)_k (b)_k / (c)_k z^k / k!, direct
// summation with a term-ratio convergence test and a hard term cap.
double hyp2f1(double a, double b, double c, double z, double tol = 1e-12);

// n i.i.d. draws, deterministic in the seed.
VectorXd sample_weights(const WeightDistribution& dist, int n, std::uint64_t seed);

} // namespace penboot
