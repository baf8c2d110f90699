#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "avgpg/chain.hpp"
#include "avgpg/rng.hpp"

using namespace avgpg;

namespace {

PolicyKernel random_ergodic_kernel(int S, std::uint64_t seed) {
    MdpGeneratorSpec spec;
    spec.num_states = S;
    spec.num_actions = 2;
    spec.seed = seed;
    return kernel_under_policy(generate_mdp(spec), make_uniform_policy(S, 2));
}

// independent oracle: repeated-squaring power iteration of the kernel
Vector stationary_by_power_iteration(const Matrix& P) {
    Matrix Q = P;
    for (int i = 0; i < 60; ++i) Q = Q * Q;  // P^(2^60)
    Vector d = Q.row(0).transpose();
    return d / d.sum();
}

}  // namespace

TEST_CASE("apply_phi centers and phi_matrix is the centering projector") {
    Rng rng(4);
    Vector v(5);
    for (int i = 0; i < 5; ++i) v(i) = rng.uniform(-3.0, 3.0);
    const Vector pv = apply_phi(v);
    CHECK(pv.sum() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((pv - (v.array() - v.mean()).matrix()).norm() == doctest::Approx(0.0));

    const Matrix Phi = phi_matrix(5);
    CHECK((Phi * v - pv).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((Phi * Phi - Phi).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((Phi - Phi.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inf_operator_norm is the max absolute row sum") {
    Matrix m(2, 3);
    m << 1.0, -2.0, 0.5, 0.25, 0.25, -0.25;
    CHECK(inf_operator_norm(m) == doctest::Approx(3.5));
}

TEST_CASE("stationary distribution agrees with power iteration") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 17ULL}) {
        const PolicyKernel pk = random_ergodic_kernel(6, seed);
        const Vector d = stationary_distribution(pk).probs;
        CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.minCoeff() >= 0.0);
        CHECK((d.transpose() * pk.matrix - d.transpose()).cwiseAbs().maxCoeff() ==
              doctest::Approx(0.0).epsilon(1e-10));
        const Vector oracle = stationary_by_power_iteration(pk.matrix);
        CHECK((d - oracle).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("resolvent matches the truncated Neumann series") {
    const PolicyKernel pk = random_ergodic_kernel(5, 9);
    const Matrix M = resolvent(pk).matrix;
    const Matrix PhiP = phi_matrix(5) * pk.matrix;
    Matrix series = Matrix::Identity(5, 5);
    Matrix term = Matrix::Identity(5, 5);
    for (int k = 1; k <= 500; ++k) {
        term = term * PhiP;
        series += term;
    }
    CHECK(inf_operator_norm(M - series) <= 1e-8);
    CHECK(inf_operator_norm((Matrix::Identity(5, 5) - PhiP) * M - Matrix::Identity(5, 5)) <=
          1e-10);
}

TEST_CASE("projected powers commute: (Phi P)^k = Phi P^k") {
    const PolicyKernel pk = random_ergodic_kernel(4, 21);
    for (int k : {1, 2, 10, 50}) CHECK(matrix_power_identity_check(pk, k) <= 1e-8);
}

TEST_CASE("spectral radius of Phi P is below one on ergodic chains") {
    for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
        const SpectralCheck sc = spectral_check(random_ergodic_kernel(5, seed));
        CHECK(sc.pass);
        CHECK(sc.radius < 1.0);
    }
}

TEST_CASE("ergodicity estimate recovers the two-state mixing rate") {
    // P = [[1-a, a], [b, 1-b]] has second eigenvalue 1 - a - b
    Matrix P(2, 2);
    const double a = 0.3, b = 0.5;
    P << 1 - a, a, b, 1 - b;
    const ErgodicityEstimate est = ergodicity_estimate(PolicyKernel{P}, 30);
    CHECK(est.lambda == doctest::Approx(std::abs(1 - a - b)).epsilon(1e-10));
    // envelope property: ||P^k - 1 d'||_inf <= C_e lambda^k at every sampled k
    double lam_pow = 1.0;
    for (std::size_t k = 0; k < est.per_step_norms.size(); ++k) {
        CHECK(est.per_step_norms[k] <= est.C_e * lam_pow + 1e-9);
        lam_pow *= est.lambda + 1e-9;
    }
}

TEST_CASE("ergodicity estimate envelope holds on random chains") {
    for (std::uint64_t seed : {11ULL, 12ULL}) {
        const PolicyKernel pk = random_ergodic_kernel(6, seed);
        const ErgodicityEstimate est = ergodicity_estimate(pk, 40);
        CHECK(est.lambda < 1.0);
        CHECK(est.C_e > 0.0);
        double lam_pow = 1.0;
        for (std::size_t k = 0; k < est.per_step_norms.size(); ++k) {
            CHECK(est.per_step_norms[k] <= est.C_e * lam_pow + 1e-9);
            lam_pow *= est.lambda + 1e-9;
        }
    }
}
