#pragma once

#include <optional>

#include "penboot/model.hpp"

// Penalty values and derivatives for the supported families, on the
// per-coordinate scale of the objective
//     sum_i (y_i - x_i' t)^2 + n * sum_j P_{lambda,j}(|t_j|).
// Solvers multiply these by n to get their total l1 weights.

namespace penboot {

// P'(t) for SCAD: lambda on [0, lambda], (a lambda - t)_+ / (a - 1) beyond.
// The boundary t = lambda belongs to the first branch.
double scad_derivative(double t, double lambda, double a);

// P'(t) for MCP: (lambda - t/a)_+.
double mcp_derivative(double t, double lambda, double a);

// Antiderivatives with P(0) = 0, used by objective evaluation.
double scad_value(double t, double lambda, double a);
double mcp_value(double t, double lambda, double a);

// Per-coordinate derivative P'_{lambda,j}(t) of the spec's family.
// coord_weight carries |initial_j| for the adaptive lasso and one-step
// families, which evaluate their weight there rather than at t.  The lasso
// family is defined at the 1/n scale, so its derivative needs the sample
// size; other families ignore n.
double penalty_derivative(const PenaltySpec& spec, double t,
                          std::optional<double> coord_weight = std::nullopt,
                          int n = 1);

// Weights w_j = Pbase'(|initial_j|) for the adaptive lasso and one-step
// families; the fitted objective is then the weighted l1 problem with total
// weight n * w_j.  Rejects a zero initial coefficient whenever the weight
// would be infinite (adaptive lasso, power and log bases), naming the
// coordinate.
VectorXd one_step_weights(const PenaltySpec& spec, const VectorXd& initial_beta);

} // namespace penboot
