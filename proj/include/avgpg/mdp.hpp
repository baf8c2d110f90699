#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace avgpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kStochasticTol = 1e-12;

// Tabular MDP: kernel(s, a, s') and reward(s, a). Immutable after
// construction; all operations on it are pure.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> kernel;  // S*A*S, s-major, a-middle, s'-minor
    Matrix reward;               // S x A
    double reward_lo = -1.0;
    double reward_hi = 1.0;

    double p(int s, int a, int s2) const {
        return kernel[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    double& p(int s, int a, int s2) {
        return kernel[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    double r(int s, int a) const { return reward(s, a); }

    // row P(.|s,a) as an S-vector view
    Eigen::Map<const Vector> kernel_row(int s, int a) const {
        return Eigen::Map<const Vector>(
            kernel.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_states,
            num_states);
    }

    static TabularMdp zeros(int S, int A) {
        TabularMdp m;
        m.num_states = S;
        m.num_actions = A;
        m.kernel.assign(static_cast<std::size_t>(S) * A * S, 0.0);
        m.reward = Matrix::Zero(S, A);
        return m;
    }
};

// Per-state probability vector over actions; the optimization variable.
struct Policy {
    Matrix probs;  // S x A, rows on the simplex

    int num_states() const { return static_cast<int>(probs.rows()); }
    int num_actions() const { return static_cast<int>(probs.cols()); }
};

struct PolicyKernel {
    Matrix matrix;  // S x S row-stochastic
};

struct PolicyReward {
    Vector vector;  // length S
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

enum class KernelFamily { DirichletUniform, PermutationDeterministic, Sparse };
enum class RewardFamily { UniformRange, Sparse, TwoLevel, DiameterControlled };

struct MdpGeneratorSpec {
    int num_states = 3;
    int num_actions = 3;
    KernelFamily kernel_family = KernelFamily::DirichletUniform;
    RewardFamily reward_family = RewardFamily::UniformRange;
    int sparse_nonzeros = 2;        // Sparse kernel: nonzeros per (s,a) row
    double diameter = 1.0;          // DiameterControlled: delta
    double reward_lo = -1.0;
    double reward_hi = 1.0;
    std::uint64_t seed = 0;
};

ValidationReport validate_mdp(const TabularMdp& mdp);

PolicyKernel kernel_under_policy(const TabularMdp& mdp, const Policy& pi);
PolicyReward reward_under_policy(const TabularMdp& mdp, const Policy& pi);

// Deterministic function of the spec (seed included). Throws on exhausted
// irreducibility retries for the permutation family.
TabularMdp generate_mdp(const MdpGeneratorSpec& spec);

Policy make_uniform_policy(int S, int A);
Policy make_deterministic_policy(const std::vector<int>& action_map, int A);
// rows sampled Dirichlet(1,...,1)
Policy make_random_policy(int S, int A, std::uint64_t seed);

// strong connectivity of the support graph of a row-stochastic matrix
bool is_irreducible(const Matrix& kernel_matrix);
// irreducible + aperiodic via positivity of a high support-graph power
bool is_ergodic(const Matrix& kernel_matrix);

// Plain-text serialization: "avgpg-mdp 1" header, S, A, reward range,
// kernel flattened s-major/a-middle/s'-minor, then reward row-major.
std::string serialize_mdp(const TabularMdp& mdp);
std::optional<TabularMdp> deserialize_mdp(const std::string& text);

}  // namespace avgpg
