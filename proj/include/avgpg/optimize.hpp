#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avgpg/gradient.hpp"

namespace avgpg {

// Euclidean projection onto the probability simplex by sort-and-threshold.
// Deterministic: stable sort with index-order tie-break.
Vector project_simplex(const Vector& y);

// Pi is a product of per-state simplices, so projection factorizes row-wise.
Policy project_policy(const Matrix& y);

Policy pga_step(const TabularMdp& mdp, const Policy& pi, double eta);

struct RunConfig {
    double eta = 0.0;            // <= 0 means auto (1 / L2 supplied by caller)
    int max_iters = 1000;
    double stop_tolerance = 0.0;   // on ||pi_{k+1} - pi_k||_2
    int record_every = 1;
    bool record_policies = false;
};

struct TraceRow {
    int iter = 0;
    double rho = 0.0;
    double gap = 0.0;              // rho* - rho, NaN when no oracle
    double step_norm = 0.0;        // ||pi_{k+1} - pi_k||_2
    double grad_map_norm = 0.0;    // step_norm / eta
    double cumulative_regret = 0.0;
};

struct RunTrace {
    std::vector<TraceRow> rows;
    std::vector<Matrix> policies;  // when recorded: policy at each recorded iter
    double eta = 0.0;
};

RunTrace run_pga(const TabularMdp& mdp, const Policy& pi0, const RunConfig& config,
                 std::optional<double> rho_star = std::nullopt);

// Projection variational inequalities at b = project_policy(a + u):
//   p1 = <u, b-a> - ||b-a||^2   (>= 0 up to round-off)
//   p2 = <c-b, u-(b-a)>          (<= 0 up to round-off)
struct ProjectionProperties {
    double p1 = 0.0;
    double p2 = 0.0;
};
ProjectionProperties projection_property_check(const Matrix& a, const Matrix& u, const Matrix& c);

struct DescentReport {
    int ascent_violations = 0;        // rho_{k+1} - rho_k >= (L2/2)||step||^2
    double ascent_worst_margin = 0.0;
    int alignment_violations = 0;     // <grad_{k+1}, pi'-pi_{k+1}> <= 4 sqrt(S) L2 ||step||
    double alignment_worst_margin = 0.0;
    int recursion_violations = 0;     // a_{k+1}^2 + a_{k+1} - a_k <= 0
    double recursion_worst_margin = 0.0;
};

// Checks the per-iteration inequalities on a trace recorded with policies and
// gaps. comparison_policies supplies the quantifier set for the alignment
// bound (extreme points witness the max of the linear form).
DescentReport verify_descent_inequalities(const TabularMdp& mdp, const RunTrace& trace,
                                          double L2, double C_PL,
                                          const std::vector<Policy>& comparison_policies);

// CSV columns: iter,rho,gap,step_norm,grad_map_norm,cumulative_regret,rate_bound
std::string trace_to_csv(const RunTrace& trace, double S_L2_CPL2_128,
                         std::optional<double> initial_gap);

}  // namespace avgpg
