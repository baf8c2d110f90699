#pragma once

#include <vector>

#include "avgpg/mdp.hpp"

namespace avgpg {

struct StationaryDistribution {
    Vector probs;  // length S, d' P = d'
};

struct Resolvent {
    Matrix matrix;  // (I - Phi P)^{-1}
};

struct ErgodicityEstimate {
    double C_e = 0.0;
    double lambda = 0.0;                  // second-largest eigenvalue modulus
    std::vector<double> per_step_norms;   // ||P^k - 1 d'||_inf, k = 0..max_k
};

// v - mean(v) * 1
Vector apply_phi(const Vector& v);
// I - 11'/S
Matrix phi_matrix(int S);

// max row sum of absolute values (infinity operator norm)
double inf_operator_norm(const Matrix& m);

// Solves (P' - I) d = 0 with the normalization row sum(d) = 1 appended.
// Throws if the solve fails or the residual exceeds tolerance.
StationaryDistribution stationary_distribution(const PolicyKernel& pk);

// dense solve of (I - Phi P) X = I
Resolvent resolvent(const PolicyKernel& pk);

struct SpectralCheck {
    double radius = 0.0;
    bool pass = false;  // radius < 1 - 1e-9
};
SpectralCheck spectral_check(const PolicyKernel& pk);

// || (Phi P)^k - Phi P^k ||_inf
double matrix_power_identity_check(const PolicyKernel& pk, int k);

ErgodicityEstimate ergodicity_estimate(const PolicyKernel& pk, int max_k);

}  // namespace avgpg
