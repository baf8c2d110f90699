#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "avgpg/constants.hpp"
#include "avgpg/optimize.hpp"
#include "avgpg/oracle.hpp"
#include "avgpg/rng.hpp"

using namespace avgpg;

namespace {

TabularMdp make_instance(std::uint64_t seed, int S = 4, int A = 3) {
    MdpGeneratorSpec spec;
    spec.num_states = S;
    spec.num_actions = A;
    spec.seed = seed;
    return generate_mdp(spec);
}

Vector random_vector(int n, Rng& rng, double lo, double hi) {
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.uniform(lo, hi);
    return y;
}

Vector random_simplex_point(int n, Rng& rng) {
    Vector z(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        z(i) = rng.exponential();
        sum += z(i);
    }
    return z / sum;
}

}  // namespace

TEST_CASE("simplex projection is the nearest feasible point") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(6));
        const Vector y = random_vector(n, rng, -2.0, 2.0);
        const Vector x = project_simplex(y);
        CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(x.minCoeff() >= 0.0);
        // variational oracle: no random feasible point is closer to y
        const double dist = (y - x).squaredNorm();
        for (int probe = 0; probe < 50; ++probe) {
            const Vector z = random_simplex_point(n, rng);
            CHECK(dist <= (y - z).squaredNorm() + 1e-12);
        }
    }
}

TEST_CASE("projection fixes feasible points and handles ties deterministically") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector z = random_simplex_point(4, rng);
        CHECK((project_simplex(z) - z).cwiseAbs().maxCoeff() <= 1e-12);
    }
    Vector tied(4);
    tied << 0.7, 0.7, 0.7, -0.1;
    const Vector a = project_simplex(tied);
    const Vector b = project_simplex(tied);
    CHECK(a == b);
    CHECK(a(0) == doctest::Approx(a(1)).epsilon(1e-15));
    CHECK(a(1) == doctest::Approx(a(2)).epsilon(1e-15));
}

TEST_CASE("known projections") {
    Vector y(3);
    y << 2.0, 0.0, 0.0;  // projects to the first vertex
    CHECK((project_simplex(y) - Vector::Unit(3, 0)).cwiseAbs().maxCoeff() <= 1e-12);
    y << 0.5, 0.3, 0.2;  // already feasible
    CHECK((project_simplex(y) - y).cwiseAbs().maxCoeff() <= 1e-12);
    y << 1.0, 1.0, -1.0;  // symmetric overshoot splits the mass
    const Vector x = project_simplex(y);
    CHECK(x(0) == doctest::Approx(0.5));
    CHECK(x(1) == doctest::Approx(0.5));
    CHECK(x(2) == doctest::Approx(0.0));
}

TEST_CASE("policy projection factorizes over rows") {
    Rng rng(3);
    Matrix y(3, 4);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 4; ++a) y(s, a) = rng.uniform(-1.5, 1.5);
    const Policy pi = project_policy(y);
    for (int s = 0; s < 3; ++s)
        CHECK((pi.probs.row(s).transpose() - project_simplex(y.row(s).transpose()))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-14);
}

TEST_CASE("projection variational properties hold on random triples") {
    Rng rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        Matrix a(2, 3), u(2, 3), c(2, 3);
        for (int s = 0; s < 2; ++s) {
            a.row(s) = random_simplex_point(3, rng).transpose();
            c.row(s) = random_simplex_point(3, rng).transpose();
            u.row(s) = random_vector(3, rng, -1.0, 1.0).transpose();
        }
        const ProjectionProperties pp = projection_property_check(a, u, c);
        CHECK(pp.p1 >= -1e-10);
        CHECK(pp.p2 <= 1e-10);
    }
}

TEST_CASE("one ascent step never decreases the gain at a safe step size") {
    for (std::uint64_t seed : {1ULL, 5ULL, 9ULL}) {
        const TabularMdp mdp = make_instance(seed);
        ProbeOptions opt;
        opt.budget = 200;
        opt.seed = seed;
        const ConstantsReport rep = assemble_constants(mdp, opt);
        const double eta = 1.0 / rep.search.L2;
        Policy pi = make_uniform_policy(4, 3);
        const double before = average_reward(mdp, pi).value;
        pi = pga_step(mdp, pi, eta);
        CHECK(is_feasible_policy(pi.probs));
        CHECK(average_reward(mdp, pi).value >= before - 1e-12);
    }
}

TEST_CASE("run_pga produces a monotone recorded trace with correct bookkeeping") {
    const TabularMdp mdp = make_instance(7);
    const OptimalSolution sol = solve_optimal(mdp);
    ProbeOptions opt;
    opt.budget = 200;
    opt.seed = 7;
    const ConstantsReport rep = assemble_constants(mdp, opt, &sol.pi_star);

    RunConfig rc;
    rc.eta = 1.0 / rep.search.L2;
    rc.max_iters = 400;
    rc.record_every = 20;
    rc.record_policies = true;
    const RunTrace trace = run_pga(mdp, make_uniform_policy(4, 3), rc, sol.rho_star);

    REQUIRE(trace.rows.size() == 21);  // iter 0 plus 400/20 records
    CHECK(trace.rows.front().iter == 0);
    CHECK(trace.rows.back().iter == 400);
    CHECK(trace.policies.size() == trace.rows.size());
    double prev = -2.0;
    for (const auto& row : trace.rows) {
        CHECK(row.rho >= prev - 1e-12);
        CHECK(row.gap == doctest::Approx(sol.rho_star - row.rho).epsilon(1e-12));
        prev = row.rho;
    }
    // regret accumulates every iteration, so it is nondecreasing
    for (std::size_t i = 1; i < trace.rows.size(); ++i)
        CHECK(trace.rows[i].cumulative_regret >= trace.rows[i - 1].cumulative_regret - 1e-15);

    // a rerun is bitwise identical
    const RunTrace again = run_pga(mdp, make_uniform_policy(4, 3), rc, sol.rho_star);
    for (std::size_t i = 0; i < trace.rows.size(); ++i)
        CHECK(trace.rows[i].rho == again.rows[i].rho);
}

TEST_CASE("per-iteration inequality checks pass with valid constants") {
    const TabularMdp mdp = make_instance(11);
    const OptimalSolution sol = solve_optimal(mdp);
    ProbeOptions opt;
    opt.budget = 200;
    opt.seed = 11;
    const ConstantsReport rep = assemble_constants(mdp, opt, &sol.pi_star);
    const double L2 = rep.certified.L2;

    RunConfig rc;
    rc.eta = 1.0 / L2;
    rc.max_iters = 200;
    rc.record_every = 1;
    rc.record_policies = true;
    const RunTrace trace = run_pga(mdp, make_uniform_policy(4, 3), rc, sol.rho_star);
    const DescentReport dr =
        verify_descent_inequalities(mdp, trace, L2, rep.search.C_PL, {sol.pi_star});
    CHECK(dr.ascent_violations == 0);
    CHECK(dr.alignment_violations == 0);
    CHECK(dr.recursion_violations == 0);
}

TEST_CASE("trace csv header is pinned") {
    RunTrace t;
    t.eta = 0.1;
    t.rows.push_back({0, 0.5, 0.25, 0.0, 0.0, 0.0});
    const std::string csv = trace_to_csv(t, 10.0, 0.25);
    CHECK(csv.rfind("iter,rho,gap,step_norm,grad_map_norm,cumulative_regret,rate_bound",
                    0) == 0);
}
