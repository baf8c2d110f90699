#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "avgpg/constants.hpp"
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

// independent kappa_r oracle: enumerate all deterministic policies by odometer
// and center each induced reward vector directly
double kappa_r_by_enumeration(const TabularMdp& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions;
    std::vector<int> actions(S, 0);
    double best = 0.0;
    while (true) {
        Vector r(S);
        for (int s = 0; s < S; ++s) r(s) = mdp.r(s, actions[s]);
        const Vector centered = r.array() - r.mean();
        best = std::max(best, centered.cwiseAbs().maxCoeff());
        int i = 0;
        while (i < S && ++actions[i] == A) actions[i++] = 0;
        if (i == S) break;
    }
    return best;
}

}  // namespace

TEST_CASE("exact kappa_r equals exhaustive enumeration") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const TabularMdp mdp = make_instance(seed, 5, 3);
        CHECK(kappa_r_exact(mdp) ==
              doctest::Approx(kappa_r_by_enumeration(mdp)).epsilon(1e-12));
    }
    // rewards in [-1, 1] give the a-priori cap of 2
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
        CHECK(kappa_r_exact(make_instance(seed * 7, 6, 4)) <= 2.0 + 1e-12);
}

TEST_CASE("smoothness formulas agree with hand arithmetic") {
    // all-ones inputs: L1 = 2(1 + 1 + 2(1 + 1)) = 12,
    //                  L2 = 4(1 + 1 + 2*2 + 4*2) = 56
    CHECK(l1_formula(1, 1, 1, 1) == doctest::Approx(12.0));
    CHECK(l2_formula(1, 1, 1, 1) == doctest::Approx(56.0));
    // C_m = 2, C_p = 0.5, C_r = 1, kappa_r = 1.5:
    // L1 = 2(1 + 0.5*2*1.5 + 2(4*0.5*1.5 + 2*1)) = 2(1 + 1.5 + 2*5) = 25
    CHECK(l1_formula(2, 0.5, 1, 1.5) == doctest::Approx(25.0));
    // L2 = 4(0.25*4*1.5 + 0.5*2*1 + 1.5(4*0.5*1.5 + 2) + 4(8*0.25*1.5 + 4*0.5))
    //    = 4(1.5 + 1 + 1.5*5 + 4*5) = 4*30 = 120
    CHECK(l2_formula(2, 0.5, 1, 1.5) == doctest::Approx(120.0));
}

TEST_CASE("search estimates respect their certified caps") {
    for (std::uint64_t seed : {3ULL, 13ULL, 23ULL}) {
        const TabularMdp mdp = make_instance(seed, 4, 4);
        ProbeOptions opt;
        opt.budget = 400;
        opt.seed = seed;
        const double sqrtA = std::sqrt(4.0);
        CHECK(c_r_estimate(mdp, opt).value <= sqrtA + 1e-12);
        CHECK(c_p_estimate(mdp, opt).value <= sqrtA + 1e-12);
        const CmEstimate cm = c_m_estimate(mdp, opt);
        CHECK(cm.best.value <= cm.envelope + 1e-9);
        CHECK(cm.lambda < 1.0);
    }
}

TEST_CASE("assembled report orders search below certified") {
    const TabularMdp mdp = make_instance(6, 4, 3);
    const OptimalSolution sol = solve_optimal(mdp);
    ProbeOptions opt;
    opt.budget = 300;
    opt.seed = 6;
    const ConstantsReport rep = assemble_constants(mdp, opt, &sol.pi_star);
    CHECK(rep.search.C_p <= rep.certified.C_p + 1e-12);
    CHECK(rep.search.C_r <= rep.certified.C_r + 1e-12);
    CHECK(rep.search.C_m <= rep.certified.C_m + 1e-9);
    CHECK(rep.search.kappa_r == rep.certified.kappa_r);
    CHECK(rep.search.L2 <= rep.certified.L2);
    CHECK(rep.certified.C_p == doctest::Approx(std::sqrt(3.0)));
    CHECK(rep.certified.C_r == doctest::Approx(std::sqrt(3.0)));
    CHECK(rep.certified.prov_C_m == Provenance::UpperBound);
    // the certified resolvent cap is the mixing-based envelope
    CHECK(rep.certified.C_m ==
          doctest::Approx(2.0 * rep.certified.C_e * 4 / (1.0 - rep.certified.lambda)));
    // empirical curvature never exceeds the certified smoothness
    CHECK(empirical_smoothness(mdp, 200, 5) <= rep.certified.L2);
}

TEST_CASE("deterministic enumeration kernel: counts, caps, serial/parallel parity") {
    CHECK(deterministic_policy_count(3, 4, 1000) == 64);
    CHECK(deterministic_policy_count(10, 10, 1000) == -1);  // exceeds the cap

    const TabularMdp mdp = make_instance(2, 4, 3);
    const std::function<double(const Policy&)> f = [&](const Policy& pi) {
        return average_reward(mdp, pi).value;
    };
    int skipped_serial = 0, skipped_parallel = 0;
    const double serial = max_over_deterministic_policies(4, 3, 1000, f, &skipped_serial,
                                                          false);
    const double parallel = max_over_deterministic_policies(4, 3, 1000, f, &skipped_parallel,
                                                            true);
    CHECK(serial == parallel);
    CHECK(skipped_serial == skipped_parallel);
    CHECK(max_over_deterministic_policies(10, 10, 1000, f) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("probing is reproducible and serial/parallel agree") {
    const TabularMdp mdp = make_instance(8, 5, 3);
    ProbeOptions opt;
    opt.budget = 500;
    opt.seed = 8;
    opt.enumeration_cap = 0;  // force the probing path
    opt.parallel = false;
    const double cp_serial = c_p_estimate(mdp, opt).value;
    const double cm_serial = c_m_estimate(mdp, opt).best.value;
    opt.parallel = true;
    CHECK(c_p_estimate(mdp, opt).value == cp_serial);
    CHECK(c_m_estimate(mdp, opt).best.value == cm_serial);
    CHECK(c_p_estimate(mdp, opt).value == c_p_estimate(mdp, opt).value);
}

TEST_CASE("PL constant bounds the gap on random policies") {
    const TabularMdp mdp = make_instance(15, 3, 3);
    const OptimalSolution sol = solve_optimal(mdp);
    ProbeOptions opt;
    opt.budget = 300;
    opt.seed = 15;
    const Estimate cpl = c_pl_estimate(mdp, sol.pi_star, opt);
    for (std::uint64_t s : {1ULL, 2ULL, 3ULL, 4ULL}) {
        const Policy pi = make_random_policy(3, 3, s);
        CHECK(pl_inequality_check(mdp, pi, sol, cpl.value) >= -1e-9);
    }
}

TEST_CASE("constants csv carries both flavors with provenance labels") {
    const TabularMdp mdp = make_instance(4, 3, 3);
    ProbeOptions opt;
    opt.budget = 100;
    opt.seed = 4;
    const ConstantsReport rep = assemble_constants(mdp, opt);
    const std::string csv = constants_to_csv("t", rep, 1.0);
    CHECK(csv.find("search") != std::string::npos);
    CHECK(csv.find("certified") != std::string::npos);
    CHECK(csv.find("upper-bound") != std::string::npos);
}
