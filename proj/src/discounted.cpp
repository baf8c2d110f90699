#include "avgpg/discounted.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "avgpg/constants.hpp"

namespace avgpg {

Vector uniform_distribution(int S) {
    return Vector::Constant(S, 1.0 / S);
}

DiscountedValue discounted_value(const TabularMdp& mdp, const Policy& pi, double gamma,
                                 const Vector& mu) {
    if (gamma <= 0.0 || gamma >= 1.0)
        throw std::invalid_argument("discounted_value: gamma must lie in (0,1)");
    const int S = mdp.num_states;
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const PolicyReward pr = reward_under_policy(mdp, pi);
    const Matrix lhs = Matrix::Identity(S, S) - gamma * pk.matrix;
    Vector v = lhs.partialPivLu().solve(pr.vector);
    DiscountedValue out;
    out.gamma = gamma;
    out.mu = mu;
    out.state_values = std::move(v);
    out.value = mu.dot(out.state_values);
    return out;
}

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const Policy& pi, double gamma,
                                   const Vector& mu) {
    const int S = mdp.num_states;
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const Matrix lhs = Matrix::Identity(S, S) - gamma * pk.matrix.transpose();
    Vector d = (1.0 - gamma) * lhs.partialPivLu().solve(mu);
    return OccupancyMeasure{std::move(d)};
}

Matrix discounted_gradient(const TabularMdp& mdp, const Policy& pi, double gamma,
                           const Vector& mu) {
    const int S = mdp.num_states, A = mdp.num_actions;
    const DiscountedValue dv = discounted_value(mdp, pi, gamma, mu);
    const OccupancyMeasure occ = occupancy_measure(mdp, pi, gamma, mu);
    Matrix g(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double q = mdp.r(s, a) + gamma * mdp.kernel_row(s, a).dot(dv.state_values);
            g(s, a) = occ.d(s) / (1.0 - gamma) * q;
        }
    return g;
}

DiscountedTrace run_discounted_pga(const TabularMdp& mdp, const Policy& pi0, double gamma,
                                   const Vector& mu, int iters, double optimal_value,
                                   const Vector& d_mu_star) {
    const int S = mdp.num_states, A = mdp.num_actions;
    const double eta = std::pow(1.0 - gamma, 3) / (2.0 * gamma * A);
    double mismatch = 0.0;  // ||d_mu(pi*)/mu||_inf
    for (int s = 0; s < S; ++s)
        mismatch = std::max(mismatch, d_mu_star(s) / std::max(mu(s), 1e-300));
    const double bound_scale =
        128.0 * S * A / std::pow(1.0 - gamma, 5) * mismatch * mismatch;

    DiscountedTrace trace;
    trace.eta = eta;
    Policy pi = pi0;
    for (int k = 0; k <= iters; ++k) {
        const double val = discounted_value(mdp, pi, gamma, mu).value;
        const double bound =
            (k >= 1) ? bound_scale / k : std::numeric_limits<double>::infinity();
        trace.rows.push_back(DiscountedTraceRow{k, val, optimal_value - val, bound});
        if (k < iters)
            pi = project_policy(pi.probs + eta * discounted_gradient(mdp, pi, gamma, mu));
    }
    return trace;
}

std::vector<VanishingDiscountRow> vanishing_discount_check(const TabularMdp& mdp,
                                                           const Policy& pi,
                                                           const std::vector<double>& gammas) {
    const double rho = average_reward(mdp, pi).value;
    const Vector mu = uniform_distribution(mdp.num_states);
    std::vector<VanishingDiscountRow> rows;
    for (double g : gammas) {
        const double scaled = (1.0 - g) * discounted_value(mdp, pi, g, mu).value;
        rows.push_back(VanishingDiscountRow{g, scaled, rho, std::abs(scaled - rho)});
    }
    return rows;
}

DiscountedConstants discounted_smoothness_constants(const TabularMdp& mdp, double gamma,
                                                    long budget, std::uint64_t seed) {
    const int S = mdp.num_states, A = mdp.num_actions;
    DiscountedConstants out;
    out.gamma = gamma;
    out.C_m_hat_bound = 1.0 / (1.0 - gamma);

    auto eval = [&](const Policy& pi) {
        const PolicyKernel pk = kernel_under_policy(mdp, pi);
        const Matrix lhs = Matrix::Identity(S, S) - gamma * pk.matrix;
        return inf_operator_norm(lhs.partialPivLu().solve(Matrix::Identity(S, S)));
    };

    double best = max_over_deterministic_policies(S, A, 4096, eval, nullptr, true);
    for (long i = 0; i < budget; ++i) {
        best = std::max(best, eval(make_random_policy(S, A, seed + 1000 * i)));
    }
    out.C_m_hat = best;
    if (out.C_m_hat > out.C_m_hat_bound + 1e-9)
        throw std::runtime_error("discounted_smoothness_constants: C_m_hat exceeds 1/(1-gamma)");

    ProbeOptions opt;
    opt.budget = budget;
    opt.seed = seed;
    const Estimate cp = c_p_estimate(mdp, opt);
    const Estimate cr = c_r_estimate(mdp, opt);
    const double kappa = kappa_r_exact(mdp);
    out.L2 = l2_formula(out.C_m_hat, cp.value, cr.value, kappa);
    return out;
}

}  // namespace avgpg
