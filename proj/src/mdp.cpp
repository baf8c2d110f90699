#include "avgpg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "avgpg/rng.hpp"

namespace avgpg {

ValidationReport validate_mdp(const TabularMdp& mdp) {
    ValidationReport rep;
    const int S = mdp.num_states, A = mdp.num_actions;
    if (S <= 0 || A <= 0) {
        rep.violations.push_back("non-positive dimensions");
        return rep;
    }
    if (mdp.kernel.size() != static_cast<std::size_t>(S) * A * S ||
        mdp.reward.rows() != S || mdp.reward.cols() != A) {
        rep.violations.push_back("shape mismatch between declared sizes and tensors");
        return rep;
    }
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                const double v = mdp.p(s, a, s2);
                if (v < 0.0) {
                    std::ostringstream os;
                    os << "negative kernel entry at (s=" << s << ",a=" << a << ",s'=" << s2 << ")";
                    rep.violations.push_back(os.str());
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > kStochasticTol) {
                std::ostringstream os;
                os << "row (s=" << s << ",a=" << a << ") sums to " << sum;
                rep.violations.push_back(os.str());
            }
            const double rv = mdp.r(s, a);
            if (rv < mdp.reward_lo - kStochasticTol || rv > mdp.reward_hi + kStochasticTol) {
                std::ostringstream os;
                os << "reward " << rv << " at (s=" << s << ",a=" << a << ") outside ["
                   << mdp.reward_lo << "," << mdp.reward_hi << "]";
                rep.violations.push_back(os.str());
            }
        }
    }
    return rep;
}

PolicyKernel kernel_under_policy(const TabularMdp& mdp, const Policy& pi) {
    const int S = mdp.num_states, A = mdp.num_actions;
    if (pi.num_states() != S || pi.num_actions() != A)
        throw std::invalid_argument("kernel_under_policy: dimension mismatch");
    Matrix m = Matrix::Zero(S, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            m.row(s) += pi.probs(s, a) * mdp.kernel_row(s, a).transpose();
    return PolicyKernel{std::move(m)};
}

PolicyReward reward_under_policy(const TabularMdp& mdp, const Policy& pi) {
    const int S = mdp.num_states, A = mdp.num_actions;
    if (pi.num_states() != S || pi.num_actions() != A)
        throw std::invalid_argument("reward_under_policy: dimension mismatch");
    Vector v(S);
    for (int s = 0; s < S; ++s) v(s) = pi.probs.row(s).dot(mdp.reward.row(s));
    return PolicyReward{std::move(v)};
}

Policy make_uniform_policy(int S, int A) {
    return Policy{Matrix::Constant(S, A, 1.0 / A)};
}

Policy make_deterministic_policy(const std::vector<int>& action_map, int A) {
    const int S = static_cast<int>(action_map.size());
    Matrix m = Matrix::Zero(S, A);
    for (int s = 0; s < S; ++s) {
        if (action_map[s] < 0 || action_map[s] >= A)
            throw std::out_of_range("make_deterministic_policy: action index out of range");
        m(s, action_map[s]) = 1.0;
    }
    return Policy{std::move(m)};
}

Policy make_random_policy(int S, int A, std::uint64_t seed) {
    Rng rng(seed, /*stream=*/0x706f6c69);
    Matrix m(S, A);
    for (int s = 0; s < S; ++s) {
        double sum = 0.0;
        for (int a = 0; a < A; ++a) {
            m(s, a) = rng.exponential();
            sum += m(s, a);
        }
        m.row(s) /= sum;
    }
    return Policy{std::move(m)};
}

bool is_irreducible(const Matrix& kernel_matrix) {
    const int S = static_cast<int>(kernel_matrix.rows());
    auto reaches_all = [&](bool forward) {
        std::vector<char> seen(S, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < S; ++v) {
                const double w = forward ? kernel_matrix(u, v) : kernel_matrix(v, u);
                if (w > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == S;
    };
    return reaches_all(true) && reaches_all(false);
}

bool is_ergodic(const Matrix& kernel_matrix) {
    if (!is_irreducible(kernel_matrix)) return false;
    const int S = static_cast<int>(kernel_matrix.rows());
    // P^m entrywise positive for m = (S-1)^2 + 1 iff irreducible + aperiodic
    Matrix b = (kernel_matrix.array() > 0.0).cast<double>();
    Matrix acc = b;
    int target = (S - 1) * (S - 1) + 1;
    for (int m = 1; m < target; ++m) {
        acc = ((acc * b).array() > 0.0).cast<double>();
        if ((acc.array() > 0.0).all()) return true;
    }
    return (acc.array() > 0.0).all();
}

namespace {

void fill_kernel(TabularMdp& mdp, const MdpGeneratorSpec& spec, Rng& rng) {
    const int S = spec.num_states, A = spec.num_actions;
    switch (spec.kernel_family) {
        case KernelFamily::DirichletUniform:
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    double sum = 0.0;
                    for (int s2 = 0; s2 < S; ++s2) {
                        mdp.p(s, a, s2) = rng.exponential();
                        sum += mdp.p(s, a, s2);
                    }
                    for (int s2 = 0; s2 < S; ++s2) mdp.p(s, a, s2) /= sum;
                }
            break;
        case KernelFamily::PermutationDeterministic:
            for (int a = 0; a < A; ++a) {
                std::vector<int> perm(S);
                std::iota(perm.begin(), perm.end(), 0);
                for (int i = S - 1; i > 0; --i)
                    std::swap(perm[i], perm[static_cast<int>(rng.below(i + 1))]);
                for (int s = 0; s < S; ++s) mdp.p(s, a, perm[s]) = 1.0;
            }
            break;
        case KernelFamily::Sparse: {
            const int k = std::min(std::max(spec.sparse_nonzeros, 1), S);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    std::vector<int> idx(S);
                    std::iota(idx.begin(), idx.end(), 0);
                    for (int i = 0; i < k; ++i)
                        std::swap(idx[i], idx[i + static_cast<int>(rng.below(S - i))]);
                    double sum = 0.0;
                    std::vector<double> w(k);
                    for (int i = 0; i < k; ++i) {
                        w[i] = rng.exponential();
                        sum += w[i];
                    }
                    for (int i = 0; i < k; ++i) mdp.p(s, a, idx[i]) = w[i] / sum;
                }
            break;
        }
    }
}

void fill_reward(TabularMdp& mdp, const MdpGeneratorSpec& spec, Rng& rng) {
    const int S = spec.num_states, A = spec.num_actions;
    const double lo = spec.reward_lo, hi = spec.reward_hi;
    switch (spec.reward_family) {
        case RewardFamily::UniformRange:
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) mdp.reward(s, a) = rng.uniform(lo, hi);
            break;
        case RewardFamily::Sparse:
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    mdp.reward(s, a) = (rng.uniform() < 0.2) ? rng.uniform(lo, hi) : 0.0;
            break;
        case RewardFamily::TwoLevel:
            // dense two-valued reward, the extremal family for C_r
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) mdp.reward(s, a) = (rng.uniform() < 0.5) ? lo : hi;
            break;
        case RewardFamily::DiameterControlled: {
            // r(s,a) = base(s) + delta*noise(s,a); reward diameter scales with delta
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            const double d = std::min(std::max(spec.diameter, 0.0), 1.0);
            for (int s = 0; s < S; ++s) {
                const double base = mid + (1.0 - d) * half * rng.uniform(-1.0, 1.0);
                for (int a = 0; a < A; ++a)
                    mdp.reward(s, a) = base + d * half * rng.uniform(-1.0, 1.0);
            }
            break;
        }
    }
}

}  // namespace

TabularMdp generate_mdp(const MdpGeneratorSpec& spec) {
    const int S = spec.num_states, A = spec.num_actions;
    if (S <= 0 || A <= 0) throw std::invalid_argument("generate_mdp: bad sizes");
    constexpr int kMaxRetries = 64;
    Rng rng(spec.seed, /*stream=*/0x6d6470);
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        TabularMdp mdp = TabularMdp::zeros(S, A);
        mdp.reward_lo = spec.reward_lo;
        mdp.reward_hi = spec.reward_hi;
        fill_kernel(mdp, spec, rng);
        fill_reward(mdp, spec, rng);
        if (spec.kernel_family == KernelFamily::PermutationDeterministic ||
            spec.kernel_family == KernelFamily::Sparse) {
            const Policy uni = make_uniform_policy(S, A);
            if (!is_irreducible(kernel_under_policy(mdp, uni).matrix)) continue;
        }
        return mdp;
    }
    throw std::runtime_error("generate_mdp: irreducibility retries exhausted");
}

std::string serialize_mdp(const TabularMdp& mdp) {
    std::ostringstream os;
    os.precision(17);
    os << "avgpg-mdp 1\n";
    os << mdp.num_states << " " << mdp.num_actions << "\n";
    os << mdp.reward_lo << " " << mdp.reward_hi << "\n";
    for (double v : mdp.kernel) os << v << "\n";
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) os << mdp.reward(s, a) << "\n";
    return os.str();
}

std::optional<TabularMdp> deserialize_mdp(const std::string& text) {
    std::istringstream is(text);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "avgpg-mdp" || version != 1) return std::nullopt;
    int S = 0, A = 0;
    double lo = 0, hi = 0;
    if (!(is >> S >> A >> lo >> hi) || S <= 0 || A <= 0) return std::nullopt;
    TabularMdp mdp = TabularMdp::zeros(S, A);
    mdp.reward_lo = lo;
    mdp.reward_hi = hi;
    for (double& v : mdp.kernel)
        if (!(is >> v)) return std::nullopt;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            if (!(is >> mdp.reward(s, a))) return std::nullopt;
    return mdp;
}

}  // namespace avgpg
