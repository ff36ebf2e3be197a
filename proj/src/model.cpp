#include "penboot/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace penboot {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("penalty: lambda must be finite and >= 0");
}

void check_initial(const InitialEstimator& init) {
  if (const auto* li = std::get_if<LassoInitial>(&init)) {
    if (!(li->lambda > 0.0) || !std::isfinite(li->lambda))
      throw std::invalid_argument("initial estimator: lasso lambda must be finite and > 0");
  }
}

} // namespace

void validate(const PenaltySpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LassoPenalty>) {
          check_lambda(s.lambda);
        } else if constexpr (std::is_same_v<T, ScadPenalty>) {
          check_lambda(s.lambda);
          if (!(s.a > 2.0)) throw std::invalid_argument("scad: requires a > 2");
        } else if constexpr (std::is_same_v<T, McpPenalty>) {
          check_lambda(s.lambda);
          if (!(s.a > 1.0)) throw std::invalid_argument("mcp: requires a > 1");
        } else if constexpr (std::is_same_v<T, AdaptiveLassoPenalty>) {
          check_lambda(s.lambda);
          if (!(s.gamma > 0.0)) throw std::invalid_argument("alasso: requires gamma > 0");
          check_initial(s.initial);
        } else if constexpr (std::is_same_v<T, OneStepPenalty>) {
          check_lambda(s.lambda);
          check_initial(s.initial);
          std::visit(
              [](const auto& b) {
                using B = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<B, ScadBase>) {
                  if (!(b.a > 2.0)) throw std::invalid_argument("onestep scad base: requires a > 2");
                } else if constexpr (std::is_same_v<B, McpBase>) {
                  if (!(b.a > 1.0)) throw std::invalid_argument("onestep mcp base: requires a > 1");
                } else if constexpr (std::is_same_v<B, PowerBase>) {
                  if (!(b.q > 0.0 && b.q < 1.0))
                    throw std::invalid_argument("onestep power base: requires 0 < q < 1");
                }
              },
              s.base);
        } else if constexpr (std::is_same_v<T, PostSelectionOls>) {
          if (!(s.selector_lambda > 0.0) || !std::isfinite(s.selector_lambda))
            throw std::invalid_argument("psols: selector lambda must be finite and > 0");
        }
      },
      spec);
}

EstimatorClass estimator_class(const PenaltySpec& spec) {
  return std::visit(
      [](const auto& s) -> EstimatorClass {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LassoPenalty>) {
          return EstimatorClass::III;
        } else if constexpr (std::is_same_v<T, AdaptiveLassoPenalty>) {
          return EstimatorClass::II;
        } else if constexpr (std::is_same_v<T, OneStepPenalty>) {
          // SCAD/MCP bases have a flat derivative past a*lambda, which is
          // what restores oracle behavior; power and log bases do not.
          bool flat = std::holds_alternative<ScadBase>(s.base) ||
                      std::holds_alternative<McpBase>(s.base);
          return flat ? EstimatorClass::I : EstimatorClass::II;
        } else {
          return EstimatorClass::I;
        }
      },
      spec);
}

bool needs_initial(const PenaltySpec& spec) {
  return std::holds_alternative<AdaptiveLassoPenalty>(spec) ||
         std::holds_alternative<OneStepPenalty>(spec);
}

std::vector<int> active_set_of(const VectorXd& beta, double tol) {
  std::vector<int> active;
  for (int j = 0; j < beta.size(); ++j)
    if (std::abs(beta[j]) > tol) active.push_back(j);
  return active;
}

MatrixXd contrast_active(const ContrastMatrix& D, const std::vector<int>& active) {
  MatrixXd out(D.q(), static_cast<int>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k)
    out.col(static_cast<int>(k)) = D.D.col(active[k]);
  return out;
}

GramPartition gram_partition(const RegressionProblem& problem,
                             const std::vector<int>& active) {
  const int p = problem.p();
  for (int j : active)
    if (j < 0 || j >= p) throw std::invalid_argument("gram_partition: active index out of range");

  MatrixXd C = (problem.X.transpose() * problem.X) / double(problem.n());

  std::vector<int> inactive;
  std::vector<char> is_active(p, 0);
  for (int j : active) is_active[j] = 1;
  for (int j = 0; j < p; ++j)
    if (!is_active[j]) inactive.push_back(j);

  auto block = [&C](const std::vector<int>& rows, const std::vector<int>& cols) {
    MatrixXd B(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c)
        B(static_cast<int>(r), static_cast<int>(c)) = C(rows[r], cols[c]);
    return B;
  };

  return {block(active, active), block(active, inactive),
          block(inactive, active), block(inactive, inactive)};
}

} // namespace penboot
