#include "avgpg/evaluate.hpp"

namespace avgpg {

AverageReward average_reward(const TabularMdp& mdp, const Policy& pi) {
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const PolicyReward pr = reward_under_policy(mdp, pi);
    const StationaryDistribution d = stationary_distribution(pk);
    return AverageReward{d.probs.dot(pr.vector)};
}

DifferentialValue differential_value(const TabularMdp& mdp, const Policy& pi) {
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const PolicyReward pr = reward_under_policy(mdp, pi);
    return DifferentialValue{resolvent(pk).matrix * apply_phi(pr.vector)};
}

RelativeQ relative_q(const TabularMdp& mdp, const Policy& pi) {
    const int S = mdp.num_states, A = mdp.num_actions;
    const double rho = average_reward(mdp, pi).value;
    const Vector v = differential_value(mdp, pi).values;
    Matrix q(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            q(s, a) = mdp.r(s, a) - rho + mdp.kernel_row(s, a).dot(v);
    return RelativeQ{std::move(q), "phi"};
}

double bellman_residual(const TabularMdp& mdp, const Policy& pi, const Vector& v, double rho) {
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const PolicyReward pr = reward_under_policy(mdp, pi);
    return (pr.vector + pk.matrix * v - v - rho * Vector::Ones(mdp.num_states))
        .cwiseAbs()
        .maxCoeff();
}

}  // namespace avgpg
