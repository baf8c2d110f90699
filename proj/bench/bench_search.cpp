// Compares the serial reference path against the OpenMP path of the search
// kernels (deterministic-policy enumeration and random-candidate probing)
// and checks that both give identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "avgpg/constants.hpp"
#include "avgpg/mdp.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& name, double serial_s, double parallel_s, bool same) {
    std::printf("%-28s serial %8.3fs   openmp %8.3fs   speedup %5.2fx   %s\n", name.c_str(),
                serial_s, parallel_s, serial_s / parallel_s, same ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int S = argc > 1 ? std::atoi(argv[1]) : 7;
    const int A = argc > 2 ? std::atoi(argv[2]) : 4;
    const long budget = argc > 3 ? std::atol(argv[3]) : 20000;

    avgpg::MdpGeneratorSpec spec;
    spec.num_states = S;
    spec.num_actions = A;
    spec.seed = 12;
    const avgpg::TabularMdp mdp = avgpg::generate_mdp(spec);
    std::printf("instance: %dx%d, budget %ld\n", S, A, budget);

    {
        const std::function<double(const avgpg::Policy&)> f = [&](const avgpg::Policy& pi) {
            return avgpg::average_reward(mdp, pi).value;
        };
        auto t0 = Clock::now();
        const double serial =
            avgpg::max_over_deterministic_policies(S, A, 1 << 30, f, nullptr, false);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const double parallel =
            avgpg::max_over_deterministic_policies(S, A, 1 << 30, f, nullptr, true);
        const double tp = seconds_since(t0);
        report("enumeration (rho)", ts, tp, serial == parallel);
    }

    for (const auto& [name, restrict_sc] :
         {std::pair<const char*, bool>{"C_p probe", false}, {"C_p probe (state-const)", true}}) {
        avgpg::ProbeOptions opt;
        opt.budget = budget;
        opt.enumeration_cap = 0;  // probing only: that is the parallel kernel under test
        opt.restrict_state_constant = restrict_sc;
        opt.parallel = false;
        auto t0 = Clock::now();
        const double serial = avgpg::c_p_estimate(mdp, opt).value;
        const double ts = seconds_since(t0);
        opt.parallel = true;
        t0 = Clock::now();
        const double parallel = avgpg::c_p_estimate(mdp, opt).value;
        const double tp = seconds_since(t0);
        report(name, ts, tp, serial == parallel);
    }

    {
        avgpg::ProbeOptions opt;
        opt.budget = budget;
        opt.enumeration_cap = 0;
        opt.parallel = false;
        auto t0 = Clock::now();
        const double serial = avgpg::c_m_estimate(mdp, opt).best.value;
        const double ts = seconds_since(t0);
        opt.parallel = true;
        t0 = Clock::now();
        const double parallel = avgpg::c_m_estimate(mdp, opt).best.value;
        const double tp = seconds_since(t0);
        report("C_m probe", ts, tp, serial == parallel);
    }
    return 0;
}
