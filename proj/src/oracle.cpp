#include "avgpg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "avgpg/constants.hpp"

namespace avgpg {

namespace {

constexpr long kExhaustiveCap = 100000;
constexpr long kRviMaxSweeps = 2000000;
constexpr double kLazyTau = 0.5;  // aperiodicity transform; gain is invariant

struct RviResult {
    std::vector<int> greedy;
    long sweeps = 0;
    double span = 0.0;
    bool converged = false;
};

RviResult relative_value_iteration(const TabularMdp& mdp, double tolerance) {
    const int S = mdp.num_states, A = mdp.num_actions;
    // transformed kernel P~ = (1-tau) I + tau P keeps every policy's
    // stationary distribution, hence its gain, unchanged while forcing
    // aperiodicity
    Vector h = Vector::Zero(S);
    RviResult res;
    res.greedy.assign(S, 0);
    for (long sweep = 0; sweep < kRviMaxSweeps; ++sweep) {
        Vector next(S);
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                const double q = mdp.r(s, a) + (1.0 - kLazyTau) * h(s) +
                                 kLazyTau * mdp.kernel_row(s, a).dot(h);
                if (q > best + 1e-15) {
                    best = q;
                    best_a = a;
                }
            }
            next(s) = best;
            res.greedy[s] = best_a;
        }
        const Vector diff = next - h;
        res.span = diff.maxCoeff() - diff.minCoeff();
        h = next - Vector::Constant(S, next(0));  // fixed reference state 0
        ++res.sweeps;
        if (res.span < tolerance) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace

OptimalSolution solve_optimal(const TabularMdp& mdp, OracleMethod method, double tolerance) {
    const int S = mdp.num_states, A = mdp.num_actions;
    const long n_det = deterministic_policy_count(S, A, kExhaustiveCap);

    auto exhaustive = [&]() -> OptimalSolution {
        if (n_det < 0)
            throw std::runtime_error("solve_optimal: A^S exceeds the exhaustive cap");
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> best_map;
        std::vector<int> map(S, 0);
        for (long i = 0; i < n_det; ++i) {
            long idx = i;
            for (int s = 0; s < S; ++s) {
                map[s] = static_cast<int>(idx % A);
                idx /= A;
            }
            try {
                const double rho =
                    average_reward(mdp, make_deterministic_policy(map, A)).value;
                if (rho > best + 1e-14) {
                    best = rho;
                    best_map = map;
                }
            } catch (const std::exception&) {
                // non-ergodic deterministic policy: not a witness under Assumption 1
            }
        }
        if (best_map.empty())
            throw std::runtime_error("solve_optimal: no ergodic deterministic policy found");
        OptimalSolution sol{make_deterministic_policy(best_map, A), best,
                            OracleMethod::Exhaustive, n_det, 0.0};
        return sol;
    };

    auto via_rvi = [&]() -> OptimalSolution {
        const RviResult res = relative_value_iteration(mdp, tolerance);
        if (!res.converged)
            throw std::runtime_error("solve_optimal: RVI did not converge within the sweep cap");
        const Policy pi = make_deterministic_policy(res.greedy, A);
        OptimalSolution sol{pi, average_reward(mdp, pi).value,
                            OracleMethod::RelativeValueIteration, res.sweeps, res.span};
        return sol;
    };

    switch (method) {
        case OracleMethod::Exhaustive:
            return exhaustive();
        case OracleMethod::RelativeValueIteration:
            return via_rvi();
        case OracleMethod::Auto:
            try {
                return via_rvi();
            } catch (const std::exception&) {
                return exhaustive();
            }
    }
    throw std::logic_error("solve_optimal: unreachable");
}

double pdl_check(const TabularMdp& mdp, const Policy& pi, const OptimalSolution& solution) {
    const double lhs = solution.rho_star - average_reward(mdp, pi).value;
    const Vector d_star =
        stationary_distribution(kernel_under_policy(mdp, solution.pi_star)).probs;
    const RelativeQ q = relative_q(mdp, pi);
    double rhs = 0.0;
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a)
            rhs += d_star(s) * q.values(s, a) * (solution.pi_star.probs(s, a) - pi.probs(s, a));
    return std::abs(lhs - rhs);
}

double pl_inequality_check(const TabularMdp& mdp, const Policy& pi,
                           const OptimalSolution& solution, double C_PL) {
    const double gap = solution.rho_star - average_reward(mdp, pi).value;
    const PolicyGradient g = policy_gradient(mdp, pi);
    // the linear form is maximized at a vertex: per state, put all mass on
    // the gradient-argmax action
    double max_inner = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        int best_a = 0;
        for (int a = 1; a < mdp.num_actions; ++a)
            if (g.grad(s, a) > g.grad(s, best_a)) best_a = a;
        max_inner += g.grad(s, best_a) - g.grad.row(s).dot(pi.probs.row(s));
    }
    return C_PL * max_inner - gap;
}

}  // namespace avgpg
