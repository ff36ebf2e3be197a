#include "penboot/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "penboot/rng.hpp"

namespace penboot {

namespace {

// central moments of a sum of two independent variables
struct Moments {
  double mean, var, mu3, mu4;
};

Moments convolve(const Moments& a, const Moments& b) {
  return {a.mean + b.mean, a.var + b.var, a.mu3 + b.mu3,
          a.mu4 + b.mu4 + 6.0 * a.var * b.var};
}

Moments gamma_moments(double shape, double scale) {
  double s2 = scale * scale;
  return {shape * scale, shape * s2, 2.0 * shape * s2 * scale,
          (3.0 * shape + 6.0) * shape * s2 * s2};
}

Moments beta_moments(double a, double b) {
  // raw moments m_k = prod_{i<k} (a+i)/(a+b+i), then centralize
  double m[5];
  m[0] = 1.0;
  for (int k = 1; k <= 4; ++k) m[k] = m[k - 1] * (a + k - 1) / (a + b + k - 1);
  double mu = m[1];
  double var = m[2] - mu * mu;
  double mu3 = m[3] - 3.0 * mu * m[2] + 2.0 * mu * mu * mu;
  double mu4 = m[4] - 4.0 * mu * m[3] + 6.0 * mu * mu * m[2] - 3.0 * mu * mu * mu * mu;
  return {mu, var, mu3, mu4};
}

// "exponential with mean m" where m may be negative; the negative case is a
// reflected exponential and the same formal moments apply
Moments exponential_moments(double m) {
  return {m, m * m, 2.0 * m * m * m, 9.0 * m * m * m * m};
}

Moments inv_gamma_moments(double shape, double scale) {
  if (shape <= 4.0) throw std::invalid_argument("inverse gamma: fourth moment needs shape > 4");
  double r1 = scale / (shape - 1.0);
  double r2 = scale * scale / ((shape - 1.0) * (shape - 2.0));
  double r3 = r2 * scale / (shape - 3.0);
  double r4 = r3 * scale / (shape - 4.0);
  double mu = r1;
  return {mu, r2 - mu * mu, r3 - 3.0 * mu * r2 + 2.0 * mu * mu * mu,
          r4 - 4.0 * mu * r3 + 6.0 * mu * mu * r2 - 3.0 * mu * mu * mu * mu};
}

bool compliant(const Moments& m, double tol) {
  double mu2 = m.mean * m.mean;
  return std::fabs(m.var - mu2) <= tol * mu2 &&
         std::fabs(m.mu3 - mu2 * m.mean) <= tol * mu2 * m.mean;
}

WeightDistribution from_moments(WeightKind kind, const Moments& m, bool nonneg) {
  WeightDistribution d;
  d.kind = kind;
  d.mu = m.mean;
  d.variance = m.var;
  d.third_central = m.mu3;
  d.fourth_central = m.mu4;
  d.moments_compliant = compliant(m, 1e-3);
  d.nonnegative_support = nonneg;
  return d;
}

// component parameters
constexpr double kGammaShape = 0.008652;
constexpr double kGammaScale = 2.0;
constexpr double kBetaMixShape = 0.036490;

double exp_component_mean() { return (79.0 - 15.0 * std::sqrt(33.0)) / 16.0; }
double invgamma_shape() { return 4.0 + std::sqrt(11.0 / 3.0); }

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// log residuals of the two generalized-gamma moment equations
void gg_residuals(double rho, double nu, double& f1, double& f2) {
  double l0 = std::lgamma(rho / nu);
  double l1 = std::lgamma((rho + 1.0) / nu);
  double l2 = std::lgamma((rho + 2.0) / nu);
  double l3 = std::lgamma((rho + 3.0) / nu);
  f1 = l2 + l0 - 2.0 * l1 - std::log(2.0);
  f2 = l3 + 2.0 * l0 - 3.0 * l1 - std::log(5.0);
}

} // namespace

WeightDistribution builtin_beta() {
  auto d = from_moments(WeightKind::BetaHalfThreeHalves, beta_moments(0.5, 1.5), true);
  return d;
}

WeightDistribution builtin_gamma_beta() {
  Moments m = convolve(gamma_moments(kGammaShape, kGammaScale),
                       beta_moments(kBetaMixShape, kBetaMixShape));
  return from_moments(WeightKind::GammaBetaMixture, m, true);
}

WeightDistribution builtin_exp_invgamma() {
  double a = invgamma_shape();
  Moments m = convolve(exponential_moments(exp_component_mean()), inv_gamma_moments(a, a));
  return from_moments(WeightKind::ExpInvGammaMixture, m, false);
}

GGSolution solve_generalized_gamma(double /*omega*/, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_generalized_gamma: tol must be positive");
  const double lo = 1e-3, hi = 50.0;
  const double llo = std::log(lo), lhi = std::log(hi);

  struct Probe {
    double resid, rho, nu;
  };
  std::vector<Probe> landscape;

  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      double rho = std::exp(llo + (i + 0.5) / 8.0 * (lhi - llo));
      double nu = std::exp(llo + (j + 0.5) / 8.0 * (lhi - llo));
      double f1, f2;

      // damped Newton with a finite-difference Jacobian
      for (int it = 0; it < 80; ++it) {
        gg_residuals(rho, nu, f1, f2);
        if (std::fabs(f1) <= tol && std::fabs(f2) <= tol) {
          GGSolution sol;
          sol.rho = rho;
          sol.nu = nu;
          sol.residual1 = f1;
          sol.residual2 = f2;
          return sol;
        }
        const double h = 1e-7;
        double a1, a2, b1, b2;
        gg_residuals(rho + h, nu, a1, a2);
        gg_residuals(rho, nu + h, b1, b2);
        double j11 = (a1 - f1) / h, j12 = (b1 - f1) / h;
        double j21 = (a2 - f2) / h, j22 = (b2 - f2) / h;
        double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double drho = (f1 * j22 - f2 * j12) / det;
        double dnu = (j11 * f2 - j21 * f1) / det;
        double step = 1.0;
        bool moved = false;
        while (step > 1e-8) {
          double nr = rho - step * drho, nn = nu - step * dnu;
          if (nr > 0.0 && nn > 0.0) {
            double g1, g2;
            gg_residuals(nr, nn, g1, g2);
            if (std::isfinite(g1) && std::isfinite(g2) &&
                std::fabs(g1) + std::fabs(g2) < std::fabs(f1) + std::fabs(f2)) {
              rho = nr;
              nu = nn;
              moved = true;
              break;
            }
          }
          step *= 0.5;
        }
        if (!moved) break;
      }
      gg_residuals(rho, nu, f1, f2);
      landscape.push_back({std::fabs(f1) + std::fabs(f2), rho, nu});
    }
  }

  std::sort(landscape.begin(), landscape.end(),
            [](const Probe& a, const Probe& b) { return a.resid < b.resid; });
  std::ostringstream os;
  os << "solve_generalized_gamma: no root within tolerance " << tol
     << "; residual landscape, best grid points:";
  for (std::size_t k = 0; k < 3 && k < landscape.size(); ++k)
    os << " [rho=" << landscape[k].rho << ", nu=" << landscape[k].nu
       << ", resid=" << landscape[k].resid << "]";
  throw std::runtime_error(os.str());
}

WeightDistribution builtin_generalized_gamma(double omega, double tol) {
  if (!(omega > 0.0)) throw std::invalid_argument("generalized gamma: omega must be positive");
  GGSolution sol = solve_generalized_gamma(omega, tol);

  // raw moments omega^k Gamma((rho+k)/nu) / Gamma(rho/nu)
  double l0 = std::lgamma(sol.rho / sol.nu);
  auto raw = [&](int k) {
    return std::pow(omega, k) * std::exp(std::lgamma((sol.rho + k) / sol.nu) - l0);
  };
  double m1 = raw(1), m2 = raw(2), m3 = raw(3), m4 = raw(4);
  Moments m{m1, m2 - m1 * m1, m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1,
            m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1};
  auto d = from_moments(WeightKind::GeneralizedGamma, m, true);
  d.gg_omega = omega;
  d.gg_rho = sol.rho;
  d.gg_nu = sol.nu;
  return d;
}

WeightDistribution custom_weights(double mu, double variance, double third_central,
                                  double fourth_central, std::function<double(Rng&)> sampler) {
  Moments m{mu, variance, third_central, fourth_central};
  auto d = from_moments(WeightKind::Custom, m, true);
  d.sampler = std::move(sampler);
  return d;
}

WeightDistribution weights_by_name(const std::string& name) {
  if (name == "beta") return builtin_beta();
  if (name == "gammabeta") return builtin_gamma_beta();
  if (name == "expinvgamma") return builtin_exp_invgamma();
  if (name == "gg") return builtin_generalized_gamma();
  throw std::invalid_argument("unknown weight distribution '" + name +
                              "' (expected beta, gammabeta, expinvgamma or gg)");
}

double hyp2f1(double a, double b, double c, double z, double tol) {
  if (z == 0.0) return 1.0;
  double term = 1.0, sum = 1.0;
  double prev_abs = 1.0;
  const long cap = 1000000;
  for (long k = 0; k < cap; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    double cur = std::fabs(term);
    if (cur <= tol * std::fabs(sum) && k > 2) return sum;
    if (k > 100 && cur > prev_abs && std::fabs(z) >= 1.0)
      throw std::runtime_error("hyp2f1: series diverges at z = " + std::to_string(z));
    prev_abs = cur;
  }
  throw std::runtime_error("hyp2f1: no convergence within the term cap");
}

GBResiduals check_generalized_beta(double f, double g, double h, double omega, double rho,
                                   double tol) {
  if (!(f > 0.0) || !(g > 0.0) || !(omega > 0.0) || !(rho > 0.0))
    throw std::invalid_argument("check_generalized_beta: parameters must be positive");
  if (h < 0.0 || h > 1.0)
    throw std::invalid_argument("check_generalized_beta: h must lie in [0, 1]");

  double lb0 = log_beta_fn(omega, rho);
  auto moment_factor = [&](int k) {
    // scale-free part of E Y^k; the g^k factor cancels between the two
    // sides of each equation
    double ratio = std::exp(log_beta_fn(omega + k / f, rho) - lb0);
    return ratio * hyp2f1(omega + k / f, k / f, omega + rho + k / f, h, tol / 10.0);
  };
  double e1 = moment_factor(1), e2 = moment_factor(2), e3 = moment_factor(3);
  return {e2 - 2.0 * e1 * e1, e3 - 5.0 * e1 * e1 * e1};
}

VectorXd sample_weights(const WeightDistribution& dist, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_weights: n must be at least 1");
  Rng rng(seed);
  VectorXd out(n);
  switch (dist.kind) {
    case WeightKind::BetaHalfThreeHalves:
      for (int i = 0; i < n; ++i) out[i] = rng.beta(0.5, 1.5);
      break;
    case WeightKind::GammaBetaMixture:
      for (int i = 0; i < n; ++i)
        out[i] = rng.gamma(kGammaShape, kGammaScale) + rng.beta(kBetaMixShape, kBetaMixShape);
      break;
    case WeightKind::ExpInvGammaMixture: {
      double a = invgamma_shape();
      double mean_abs = -exp_component_mean();  // reflected exponential
      for (int i = 0; i < n; ++i)
        out[i] = -rng.exponential(mean_abs) + rng.inv_gamma(a, a);
      break;
    }
    case WeightKind::GeneralizedGamma:
      for (int i = 0; i < n; ++i)
        out[i] = dist.gg_omega * std::pow(rng.gamma(dist.gg_rho / dist.gg_nu, 1.0), 1.0 / dist.gg_nu);
      break;
    case WeightKind::Custom:
      if (!dist.sampler) throw std::invalid_argument("custom weight distribution has no sampler");
      for (int i = 0; i < n; ++i) out[i] = dist.sampler(rng);
      break;
  }
  return out;
}

} // namespace penboot
