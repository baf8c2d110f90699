#pragma once

#include "avgpg/evaluate.hpp"
#include "avgpg/gradient.hpp"

namespace avgpg {

enum class OracleMethod { RelativeValueIteration, Exhaustive, Auto };

struct OptimalSolution {
    Policy pi_star;     // deterministic
    double rho_star = 0.0;
    OracleMethod method = OracleMethod::RelativeValueIteration;
    long iterations = 0;   // RVI sweeps or policies enumerated
    double span_residual = 0.0;
};

// Relative value iteration with span stopping (aperiodicity-transformed
// kernel, reference state 0, ties broken by lowest action index), or
// exhaustive evaluation of all A^S deterministic policies when A^S <= 1e5.
// Auto prefers RVI and falls back to exhaustive on non-convergence.
OptimalSolution solve_optimal(const TabularMdp& mdp, OracleMethod method = OracleMethod::Auto,
                              double tolerance = 1e-10);

// |(rho* - rho^pi) - sum_{s,a} d*(s) Q^pi(s,a) (pi*(a|s) - pi(a|s))|
double pdl_check(const TabularMdp& mdp, const Policy& pi, const OptimalSolution& solution);

// C_PL * max_{pi' deterministic} <pi'-pi, grad> - (rho* - rho^pi);
// nonnegative whenever C_PL is a valid upper bound
double pl_inequality_check(const TabularMdp& mdp, const Policy& pi,
                           const OptimalSolution& solution, double C_PL);

}  // namespace avgpg
