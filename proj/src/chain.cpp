#include "avgpg/chain.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avgpg {

Vector apply_phi(const Vector& v) {
    return v.array() - v.mean();
}

Matrix phi_matrix(int S) {
    return Matrix::Identity(S, S) - Matrix::Constant(S, S, 1.0 / S);
}

double inf_operator_norm(const Matrix& m) {
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

StationaryDistribution stationary_distribution(const PolicyKernel& pk) {
    const int S = static_cast<int>(pk.matrix.rows());
    Matrix lhs = pk.matrix.transpose() - Matrix::Identity(S, S);
    lhs.row(S - 1).setOnes();  // replace one equation with sum(d) = 1
    Vector rhs = Vector::Zero(S);
    rhs(S - 1) = 1.0;
    Vector d = lhs.partialPivLu().solve(rhs);
    const double residual = ((pk.matrix.transpose() * d) - d).cwiseAbs().maxCoeff();
    if (!d.allFinite() || residual > 1e-10)
        throw std::runtime_error("stationary_distribution: solve failed (non-ergodic kernel?)");
    // clamp tiny negative round-off before renormalizing
    d = d.cwiseMax(0.0);
    d /= d.sum();
    return StationaryDistribution{std::move(d)};
}

Resolvent resolvent(const PolicyKernel& pk) {
    const int S = static_cast<int>(pk.matrix.rows());
    const Matrix lhs = Matrix::Identity(S, S) - phi_matrix(S) * pk.matrix;
    Eigen::PartialPivLU<Matrix> lu(lhs);
    Matrix inv = lu.solve(Matrix::Identity(S, S));
    if (!inv.allFinite() || inf_operator_norm(lhs * inv - Matrix::Identity(S, S)) > 1e-8)
        throw std::runtime_error("resolvent: (I - Phi P) numerically singular");
    return Resolvent{std::move(inv)};
}

SpectralCheck spectral_check(const PolicyKernel& pk) {
    const int S = static_cast<int>(pk.matrix.rows());
    const Matrix m = phi_matrix(S) * pk.matrix;
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_check: eigensolver did not converge");
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    return SpectralCheck{radius, radius < 1.0 - 1e-9};
}

double matrix_power_identity_check(const PolicyKernel& pk, int k) {
    const int S = static_cast<int>(pk.matrix.rows());
    const Matrix phi = phi_matrix(S);
    const Matrix phip = phi * pk.matrix;
    Matrix lhs = Matrix::Identity(S, S);
    Matrix pk_pow = Matrix::Identity(S, S);
    for (int i = 0; i < k; ++i) {
        lhs = lhs * phip;
        pk_pow = pk_pow * pk.matrix;
    }
    return inf_operator_norm(lhs - phi * pk_pow);
}

ErgodicityEstimate ergodicity_estimate(const PolicyKernel& pk, int max_k) {
    const int S = static_cast<int>(pk.matrix.rows());
    const StationaryDistribution d = stationary_distribution(pk);
    const Matrix limit = Vector::Ones(S) * d.probs.transpose();

    ErgodicityEstimate est;
    Matrix pow = Matrix::Identity(S, S);
    for (int k = 0; k <= max_k; ++k) {
        est.per_step_norms.push_back(inf_operator_norm(pow - limit));
        pow = pow * pk.matrix;
    }

    // lambda = second-largest eigenvalue modulus of P
    Eigen::EigenSolver<Matrix> es(pk.matrix, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("ergodicity_estimate: eigensolver did not converge");
    std::vector<double> mods(S);
    for (int i = 0; i < S; ++i) mods[i] = std::abs(es.eigenvalues()(i));
    std::sort(mods.begin(), mods.end(), std::greater<>());
    est.lambda = (S > 1) ? std::min(mods[1], 1.0 - 1e-12) : 0.0;

    // smallest envelope constant; lambda inflated to dodge equality artifacts
    // and norms at round-off level (< 1e-13) treated as zero
    const double lam = est.lambda + 1e-9;
    double ce = 0.0;
    double lam_pow = 1.0;
    for (std::size_t k = 0; k < est.per_step_norms.size(); ++k) {
        if (est.per_step_norms[k] > 1e-13 && lam_pow > 1e-280)
            ce = std::max(ce, est.per_step_norms[k] / lam_pow);
        lam_pow *= lam;
    }
    est.C_e = ce;
    return est;
}

}  // namespace avgpg
