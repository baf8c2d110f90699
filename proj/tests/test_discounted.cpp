#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "avgpg/discounted.hpp"
#include "avgpg/oracle.hpp"

using namespace avgpg;

namespace {

TabularMdp make_instance(std::uint64_t seed, int S = 4, int A = 3) {
    MdpGeneratorSpec spec;
    spec.num_states = S;
    spec.num_actions = A;
    spec.seed = seed;
    return generate_mdp(spec);
}

// independent oracle: truncated series sum_t gamma^t mu P^t r
double value_by_series(const TabularMdp& mdp, const Policy& pi, double gamma,
                       const Vector& mu, int T) {
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const PolicyReward pr = reward_under_policy(mdp, pi);
    Eigen::RowVectorXd m = mu.transpose();
    double total = 0.0, g = 1.0;
    for (int t = 0; t < T; ++t) {
        total += g * m.dot(pr.vector.transpose());
        m = m * pk.matrix;
        g *= gamma;
    }
    return total;
}

}  // namespace

TEST_CASE("discounted value matches the truncated series") {
    const Vector mu = uniform_distribution(4);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const TabularMdp mdp = make_instance(seed);
        const Policy pi = make_random_policy(4, 3, seed);
        for (double gamma : {0.5, 0.9, 0.99}) {
            const DiscountedValue dv = discounted_value(mdp, pi, gamma, mu);
            const int T = static_cast<int>(std::ceil(60.0 / (1.0 - gamma)));
            CHECK(dv.value ==
                  doctest::Approx(value_by_series(mdp, pi, gamma, mu, T)).epsilon(1e-8));
            CHECK(dv.value == doctest::Approx(mu.dot(dv.state_values)).epsilon(1e-12));
        }
    }
}

TEST_CASE("occupancy measure satisfies its flow equation") {
    const TabularMdp mdp = make_instance(7);
    const Policy pi = make_random_policy(4, 3, 5);
    const Vector mu = uniform_distribution(4);
    const double gamma = 0.9;
    const Vector d = occupancy_measure(mdp, pi, gamma, mu).d;
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(d.minCoeff() >= 0.0);
    // d' = (1-gamma) mu' + gamma d' P
    const PolicyKernel pk = kernel_under_policy(mdp, pi);
    const Vector rhs = (1.0 - gamma) * mu + gamma * pk.matrix.transpose() * d;
    CHECK((d - rhs).cwiseAbs().maxCoeff() <= 1e-10);
    // occupancy-weighted reward reproduces the normalized value
    const PolicyReward pr = reward_under_policy(mdp, pi);
    CHECK(d.dot(pr.vector) ==
          doctest::Approx((1.0 - gamma) * discounted_value(mdp, pi, gamma, mu).value)
              .epsilon(1e-10));
}

TEST_CASE("discounted gradient matches finite differences") {
    const TabularMdp mdp = make_instance(4);
    Policy pi = make_random_policy(4, 3, 9);
    pi.probs = 0.5 * pi.probs + 0.5 * Matrix::Constant(4, 3, 1.0 / 3.0);
    const Vector mu = uniform_distribution(4);
    const double gamma = 0.9, eps = 1e-6;
    const Matrix grad = discounted_gradient(mdp, pi, gamma, mu);
    const Matrix u = make_random_policy(4, 3, 1).probs - make_random_policy(4, 3, 2).probs;
    const double analytic = (grad.array() * u.array()).sum();
    const double fd = (discounted_value(mdp, Policy{pi.probs + eps * u}, gamma, mu).value -
                       discounted_value(mdp, Policy{pi.probs - eps * u}, gamma, mu).value) /
                      (2 * eps);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("vanishing discount limit approaches the gain") {
    const TabularMdp mdp = make_instance(11, 5, 3);
    const Policy pi = make_random_policy(5, 3, 11);
    std::vector<double> gammas;
    for (int j = 1; j <= 10; ++j) gammas.push_back(1.0 - std::pow(2.0, -j));
    const auto rows = vanishing_discount_check(mdp, pi, gammas);
    REQUIRE(rows.size() == 10);
    const double rho = average_reward(mdp, pi).value;
    for (const auto& row : rows) {
        CHECK(row.rho == doctest::Approx(rho));
        CHECK(row.error == doctest::Approx(std::abs(row.scaled_value - rho)));
    }
    CHECK(rows.back().error <= 0.01);
    CHECK(rows.back().error <= rows.front().error);
}

TEST_CASE("discounted resolvent cap holds") {
    for (double gamma : {0.5, 0.9, 0.99}) {
        const TabularMdp mdp = make_instance(13);
        const DiscountedConstants dc = discounted_smoothness_constants(mdp, gamma, 200);
        CHECK(dc.C_m_hat <= dc.C_m_hat_bound + 1e-9);
        CHECK(dc.C_m_hat_bound == doctest::Approx(1.0 / (1.0 - gamma)));
        CHECK(dc.L2 > 0.0);
    }
}

TEST_CASE("discounted ascent improves the value and carries the bound column") {
    const TabularMdp mdp = make_instance(17);
    const Vector mu = uniform_distribution(4);
    const double gamma = 0.8;
    const OptimalSolution sol = solve_optimal(mdp);
    const double vstar = discounted_value(mdp, sol.pi_star, gamma, mu).value;
    const Vector dstar = occupancy_measure(mdp, sol.pi_star, gamma, mu).d;
    const DiscountedTrace tr =
        run_discounted_pga(mdp, make_uniform_policy(4, 3), gamma, mu, 300, vstar, dstar);
    CHECK(tr.eta == doctest::Approx(std::pow(1 - gamma, 3) / (2 * gamma * 3)));
    CHECK(tr.rows.back().value >= tr.rows.front().value - 1e-10);
    for (std::size_t i = 1; i < tr.rows.size(); ++i) {
        if (tr.rows[i].iter >= 1) CHECK(tr.rows[i].bound > 0.0);
    }
}
