#include "avgpg/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace avgpg {

Vector project_simplex(const Vector& y) {
    const int n = static_cast<int>(y.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return y(i) > y(j); });
    // largest k with sorted partial sums admitting a positive threshold
    double cumsum = 0.0;
    double tau = 0.0;
    int k = 0;
    for (int i = 0; i < n; ++i) {
        cumsum += y(order[i]);
        const double t = (cumsum - 1.0) / (i + 1);
        if (y(order[i]) - t > 0.0) {
            tau = t;
            k = i + 1;
        }
    }
    (void)k;
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = std::max(y(i) - tau, 0.0);
    return x;
}

Policy project_policy(const Matrix& y) {
    Matrix out(y.rows(), y.cols());
    for (int s = 0; s < y.rows(); ++s)
        out.row(s) = project_simplex(y.row(s).transpose()).transpose();
    return Policy{std::move(out)};
}

Policy pga_step(const TabularMdp& mdp, const Policy& pi, double eta) {
    const PolicyGradient g = policy_gradient(mdp, pi);
    return project_policy(pi.probs + eta * g.grad);
}

RunTrace run_pga(const TabularMdp& mdp, const Policy& pi0, const RunConfig& config,
                 std::optional<double> rho_star) {
    if (config.max_iters < 1) throw std::invalid_argument("run_pga: max_iters must be >= 1");
    if (config.eta <= 0.0) throw std::invalid_argument("run_pga: eta must be positive");

    RunTrace trace;
    trace.eta = config.eta;
    Policy pi = pi0;
    double regret = 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    auto record = [&](int k, double rho, double step_norm) {
        const double gap = rho_star ? (*rho_star - rho) : nan;
        if (rho_star) regret += gap;
        if (k % config.record_every == 0 || k == config.max_iters) {
            trace.rows.push_back(TraceRow{k, rho, gap, step_norm, step_norm / config.eta,
                                          rho_star ? regret : nan});
            if (config.record_policies) trace.policies.push_back(pi.probs);
        }
    };

    double rho = average_reward(mdp, pi).value;
    record(0, rho, 0.0);
    for (int k = 1; k <= config.max_iters; ++k) {
        const Policy next = pga_step(mdp, pi, config.eta);
        const double step_norm = (next.probs - pi.probs).norm();
        pi = next;
        rho = average_reward(mdp, pi).value;
        if (!std::isfinite(rho)) {
            std::ostringstream os;
            os << "run_pga: non-finite average reward at iteration " << k;
            throw std::runtime_error(os.str());
        }
        record(k, rho, step_norm);
        if (step_norm <= config.stop_tolerance && config.stop_tolerance > 0.0) break;
    }
    return trace;
}

ProjectionProperties projection_property_check(const Matrix& a, const Matrix& u,
                                               const Matrix& c) {
    const Policy bp = project_policy(a + u);
    const Matrix step = bp.probs - a;
    ProjectionProperties out;
    out.p1 = u.cwiseProduct(step).sum() - step.squaredNorm();
    out.p2 = (c - bp.probs).cwiseProduct(u - step).sum();
    return out;
}

DescentReport verify_descent_inequalities(const TabularMdp& mdp, const RunTrace& trace,
                                          double L2, double C_PL,
                                          const std::vector<Policy>& comparison_policies) {
    if (trace.policies.size() != trace.rows.size() || trace.rows.empty())
        throw std::invalid_argument("verify_descent_inequalities: trace must record policies");
    for (const auto& row : trace.rows)
        if (std::isnan(row.gap))
            throw std::invalid_argument("verify_descent_inequalities: trace lacks gap data");

    DescentReport rep;
    const int S = mdp.num_states;
    const double scale = 32.0 * L2 * S * C_PL * C_PL;
    constexpr double kTol = 1e-10;

    for (std::size_t i = 1; i < trace.rows.size(); ++i) {
        const double step = (trace.policies[i] - trace.policies[i - 1]).norm();
        const double drho = trace.rows[i].rho - trace.rows[i - 1].rho;

        // sufficient-ascent inequality
        const double ascent_margin = drho - 0.5 * L2 * step * step;
        if (ascent_margin < -kTol) ++rep.ascent_violations;
        rep.ascent_worst_margin = std::min(rep.ascent_worst_margin, ascent_margin);

        // gradient alignment against the comparison set
        const PolicyGradient g = policy_gradient(mdp, Policy{trace.policies[i]});
        double max_align = -std::numeric_limits<double>::infinity();
        for (const auto& cp : comparison_policies)
            max_align = std::max(max_align,
                                 g.grad.cwiseProduct(cp.probs - trace.policies[i]).sum());
        const double align_margin = 4.0 * std::sqrt(double(S)) * L2 * step - max_align;
        if (align_margin < -kTol) ++rep.alignment_violations;
        rep.alignment_worst_margin = std::min(rep.alignment_worst_margin, align_margin);

        // scaled suboptimality recursion
        const double ak = trace.rows[i - 1].gap / scale;
        const double ak1 = trace.rows[i].gap / scale;
        const double rec = ak1 * ak1 + ak1 - ak;
        if (rec > kTol) ++rep.recursion_violations;
        rep.recursion_worst_margin = std::max(rep.recursion_worst_margin, rec);
    }
    return rep;
}

std::string trace_to_csv(const RunTrace& trace, double S_L2_CPL2_128,
                         std::optional<double> initial_gap) {
    std::ostringstream os;
    os.precision(17);
    os << "iter,rho,gap,step_norm,grad_map_norm,cumulative_regret,rate_bound\n";
    for (const auto& row : trace.rows) {
        // O(1/k) envelope bounds the gap at iterate k+1 with k in the denominator
        double bound = std::numeric_limits<double>::quiet_NaN();
        if (initial_gap && row.iter >= 2) {
            const int k = row.iter - 1;
            bound = std::max(S_L2_CPL2_128 / k, std::pow(2.0, -0.5 * k) * (*initial_gap));
        }
        os << row.iter << "," << row.rho << "," << row.gap << "," << row.step_norm << ","
           << row.grad_map_norm << "," << row.cumulative_regret << "," << bound << "\n";
    }
    return os.str();
}

}  // namespace avgpg
