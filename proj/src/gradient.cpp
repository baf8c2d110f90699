#include "avgpg/gradient.hpp"

#include <cmath>
#include <stdexcept>

namespace avgpg {

bool is_feasible_policy(const Matrix& probs, double tol) {
    if ((probs.array() < -tol).any()) return false;
    return ((probs.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

PolicyGradient policy_gradient(const TabularMdp& mdp, const Policy& pi) {
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const StationaryDistribution d = stationary_distribution(pk);
    const RelativeQ q = relative_q(mdp, pi);
    Matrix g = q.values;
    for (int s = 0; s < mdp.num_states; ++s) g.row(s) *= d.probs(s);
    return PolicyGradient{std::move(g)};
}

double directional_derivative(const TabularMdp& mdp, const Policy& pi, const Direction& u) {
    // feasible iff pi + eps*u stays in the simplex for some eps > 0:
    // zero row sums and u(s,a) >= 0 wherever pi(s,a) = 0
    if ((u.u.rowwise().sum().array().abs() > 1e-9).any())
        throw std::invalid_argument("directional_derivative: rows of u must sum to 0");
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a)
            if (pi.probs(s, a) <= 0.0 && u.u(s, a) < -1e-12)
                throw std::invalid_argument("directional_derivative: infeasible direction");
    return policy_gradient(mdp, pi).grad.cwiseProduct(u.u).sum();
}

Matrix finite_difference_gradient(const TabularMdp& mdp, const Policy& pi, double epsilon) {
    const int S = mdp.num_states, A = mdp.num_actions;
    if (pi.probs.minCoeff() < 2.0 * epsilon)
        throw std::invalid_argument("finite_difference_gradient: policy too close to boundary");
    // response(s,a) along basis direction e_a - 1/A in state s; assembling the
    // responses directly gives a tensor whose inner product with any
    // row-zero-sum u equals the directional derivative (the -1/A parts of the
    // basis contribute a per-state constant that u annihilates)
    Matrix response(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            Policy plus = pi, minus = pi;
            for (int b = 0; b < A; ++b) {
                const double step = (b == a ? 1.0 : 0.0) - 1.0 / A;
                plus.probs(s, b) += epsilon * step;
                minus.probs(s, b) -= epsilon * step;
            }
            response(s, a) = (average_reward(mdp, plus).value - average_reward(mdp, minus).value) /
                             (2.0 * epsilon);
        }
    }
    return response;
}

Vector value_direction_derivative(const TabularMdp& mdp, const Policy& pi, const Direction& u) {
    const int S = mdp.num_states, A = mdp.num_actions;
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const PolicyReward pr = reward_under_policy(mdp, pi);
    const Matrix m = resolvent(pk).matrix;

    // policy-linear maps applied to the direction
    Matrix p_u = Matrix::Zero(S, S);
    Vector r_u = Vector::Zero(S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            p_u.row(s) += u.u(s, a) * mdp.kernel_row(s, a).transpose();
            r_u(s) += u.u(s, a) * mdp.r(s, a);
        }

    const Vector t1 = m * apply_phi(p_u * (m * apply_phi(pr.vector)));
    const Vector t2 = m * apply_phi(r_u);
    return t1 + t2;
}

double rho_second_difference(const TabularMdp& mdp, const Policy& pi, const Direction& u,
                             double alpha) {
    Policy plus{pi.probs + alpha * u.u};
    Policy minus{pi.probs - alpha * u.u};
    if (!is_feasible_policy(plus.probs) || !is_feasible_policy(minus.probs))
        throw std::invalid_argument("rho_second_difference: alpha pushes pi off the simplex");
    const double rp = average_reward(mdp, plus).value;
    const double rm = average_reward(mdp, minus).value;
    const double r0 = average_reward(mdp, pi).value;
    return (rp - 2.0 * r0 + rm) / (alpha * alpha);
}

}  // namespace avgpg
