#pragma once

#include "avgpg/evaluate.hpp"

namespace avgpg {

struct PolicyGradient {
    Matrix grad;  // S x A, grad(s,a) = d(s) Q(s,a)
};

// tensor with per-state zero row sums (difference of two policies)
struct Direction {
    Matrix u;  // S x A
};

PolicyGradient policy_gradient(const TabularMdp& mdp, const Policy& pi);

// <grad, u>; throws if the direction leaves the simplex for every epsilon > 0
double directional_derivative(const TabularMdp& mdp, const Policy& pi, const Direction& u);

// Central differences of rho over the row-zero-sum basis e_a - 1/A per state.
// Assembled so its inner product with any Direction matches the analytic one.
// Throws when pi is within 2*epsilon of the simplex boundary.
Matrix finite_difference_gradient(const TabularMdp& mdp, const Policy& pi, double epsilon);

// d v_phi / d alpha at alpha = 0 along u:  M Phi P^u M Phi r^pi + M Phi r^u
Vector value_direction_derivative(const TabularMdp& mdp, const Policy& pi, const Direction& u);

// (rho(pi + a u) - 2 rho(pi) + rho(pi - a u)) / a^2
double rho_second_difference(const TabularMdp& mdp, const Policy& pi, const Direction& u,
                             double alpha);

bool is_feasible_policy(const Matrix& probs, double tol = 1e-9);

}  // namespace avgpg
