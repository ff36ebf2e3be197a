#include "penboot/penalties.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace penboot {

double scad_derivative(double t, double lambda, double a) {
  if (t <= lambda) return lambda;
  return std::max(a * lambda - t, 0.0) / (a - 1.0);
}

double mcp_derivative(double t, double lambda, double a) {
  return std::max(lambda - t / a, 0.0);
}

double scad_value(double t, double lambda, double a) {
  if (t <= lambda) return lambda * t;
  if (t <= a * lambda)
    return lambda * lambda +
           (a * lambda * (t - lambda) - 0.5 * (t * t - lambda * lambda)) / (a - 1.0);
  return 0.5 * lambda * lambda * (a + 1.0);
}

double mcp_value(double t, double lambda, double a) {
  if (t <= a * lambda) return lambda * t - t * t / (2.0 * a);
  return 0.5 * a * lambda * lambda;
}

namespace {

double base_derivative(const OneStepBase& base, double lambda, double t, int coord) {
  return std::visit(
      [&](const auto& b) -> double {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, ScadBase>) {
          return scad_derivative(t, lambda, b.a);
        } else if constexpr (std::is_same_v<B, McpBase>) {
          return mcp_derivative(t, lambda, b.a);
        } else if constexpr (std::is_same_v<B, PowerBase>) {
          if (t == 0.0)
            throw std::invalid_argument(
                "onestep power base: zero initial coefficient at index " +
                std::to_string(coord));
          return lambda * b.q * std::pow(t, b.q - 1.0);
        } else {
          if (t == 0.0)
            throw std::invalid_argument(
                "onestep log base: zero initial coefficient at index " +
                std::to_string(coord));
          return lambda / t;
        }
      },
      base);
}

} // namespace

double penalty_derivative(const PenaltySpec& spec, double t,
                          std::optional<double> coord_weight, int n) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LassoPenalty>) {
          return s.lambda / double(n);
        } else if constexpr (std::is_same_v<T, ScadPenalty>) {
          return scad_derivative(t, s.lambda, s.a);
        } else if constexpr (std::is_same_v<T, McpPenalty>) {
          return mcp_derivative(t, s.lambda, s.a);
        } else if constexpr (std::is_same_v<T, AdaptiveLassoPenalty>) {
          double b = coord_weight.value_or(t);
          if (b == 0.0)
            throw std::invalid_argument("alasso: zero initial coefficient gives infinite weight");
          return s.lambda / std::pow(b, s.gamma);
        } else if constexpr (std::is_same_v<T, OneStepPenalty>) {
          double b = coord_weight.value_or(t);
          return base_derivative(s.base, s.lambda, b, -1);
        } else {
          throw std::invalid_argument("post-selection OLS has no penalty derivative");
        }
      },
      spec);
}

VectorXd one_step_weights(const PenaltySpec& spec, const VectorXd& initial_beta) {
  const int p = static_cast<int>(initial_beta.size());
  VectorXd w(p);
  if (const auto* al = std::get_if<AdaptiveLassoPenalty>(&spec)) {
    for (int j = 0; j < p; ++j) {
      double b = std::abs(initial_beta[j]);
      if (b == 0.0)
        throw std::invalid_argument("alasso: zero initial coefficient at index " +
                                    std::to_string(j));
      w[j] = al->lambda / std::pow(b, al->gamma);
    }
    return w;
  }
  if (const auto* os = std::get_if<OneStepPenalty>(&spec)) {
    for (int j = 0; j < p; ++j)
      w[j] = base_derivative(os->base, os->lambda, std::abs(initial_beta[j]), j);
    return w;
  }
  throw std::invalid_argument("one_step_weights: spec has no initial-estimate weights");
}

} // namespace penboot
