#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "avgpg/evaluate.hpp"

namespace avgpg {

enum class Provenance { Exact, UpperBound, SearchLowerBound };

std::string provenance_name(Provenance p);

struct Estimate {
    double value = 0.0;
    Provenance provenance = Provenance::SearchLowerBound;
};

struct ProbeOptions {
    long budget = 2000;          // random candidates per estimator
    long enumeration_cap = 4096;  // enumerate deterministic policies when A^S <= cap
    std::uint64_t seed = 1;
    bool parallel = true;         // OpenMP fan-out; serial path kept for testing
    bool restrict_state_constant = false;  // C_p search over state-constant policies only
};

struct ComplexityConstants {
    double C_m = 0.0, C_p = 0.0, C_r = 0.0, kappa_r = 0.0;
    double L1 = 0.0, L2 = 0.0;
    double C_PL = 1.0;
    double C_e = 0.0, lambda = 0.0;
    Provenance prov_C_m = Provenance::SearchLowerBound;
    Provenance prov_C_p = Provenance::SearchLowerBound;
    Provenance prov_C_r = Provenance::SearchLowerBound;
    Provenance prov_kappa_r = Provenance::Exact;
    Provenance prov_C_PL = Provenance::SearchLowerBound;
    long search_budget = 0;
    int skipped_policies = 0;  // non-ergodic policies hit during search
};

struct ConstantsReport {
    ComplexityConstants search;     // search / exact values
    ComplexityConstants certified;  // closed-form upper bounds, usable as step-size certificates
};

// exact separable maximization of max_pi ||Phi r^pi||_inf over Pi
double kappa_r_exact(const TabularMdp& mdp);

Estimate c_r_estimate(const TabularMdp& mdp, const ProbeOptions& opt);
Estimate c_p_estimate(const TabularMdp& mdp, const ProbeOptions& opt);

struct CmEstimate {
    Estimate best;       // max ||(I - Phi P)^{-1}||_inf found
    double envelope;     // 2 C_e S / (1 - lambda) from sampled (C_e, lambda) maxima
    double C_e;          // sampled maxima feeding the envelope
    double lambda;
    int skipped = 0;
};
CmEstimate c_m_estimate(const TabularMdp& mdp, const ProbeOptions& opt);

Estimate c_pl_estimate(const TabularMdp& mdp, const Policy& pi_star, const ProbeOptions& opt);

// L1 = 2(C_r + C_p C_m k_r + 2(C_m^2 C_p k_r + C_m C_r))
double l1_formula(double C_m, double C_p, double C_r, double kappa_r);
// L2 = 4(C_p^2 C_m^2 k_r + C_p C_m C_r + (C_p+1)(C_m^2 C_p k_r + C_m C_r)
//        + 4(C_m^3 C_p^2 k_r + C_m^2 C_p C_r))
double l2_formula(double C_m, double C_p, double C_r, double kappa_r);

// Runs every estimator and assembles both flavors. pi_star is needed for
// C_PL; callers without an oracle may pass nullptr (C_PL stays 1, flagged).
ConstantsReport assemble_constants(const TabularMdp& mdp, const ProbeOptions& opt,
                                   const Policy* pi_star = nullptr);

// max over sampled (pi, u, alpha) of |rho(pi+au) - rho(pi) - a<grad,u>| * 2/(a^2 ||u||^2);
// a lower bound on the restricted smoothness
double empirical_smoothness(const TabularMdp& mdp, long samples, std::uint64_t seed = 99);

std::string constants_to_csv(const std::string& instance_id, const ConstantsReport& rep,
                             double wall_seconds);

// Visits all A^S deterministic policies and returns the max of f over them.
// Throwing f-evaluations (non-ergodic policies) are skipped and counted.
// Requires A^S <= cap; returns -inf when the cap is exceeded.
double max_over_deterministic_policies(int S, int A, long cap,
                                       const std::function<double(const Policy&)>& f,
                                       int* skipped = nullptr, bool parallel = true);

// number of deterministic policies, or -1 when A^S overflows the cap
long deterministic_policy_count(int S, int A, long cap);

}  // namespace avgpg
