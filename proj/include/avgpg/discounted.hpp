#pragma once

#include <vector>

#include "avgpg/optimize.hpp"

namespace avgpg {

struct DiscountedValue {
    double gamma = 0.0;
    Vector mu;            // initial distribution
    double value = 0.0;   // mu' V
    Vector state_values;  // V = (I - gamma P)^{-1} r^pi
};

struct OccupancyMeasure {
    Vector d;  // (1-gamma) mu' (I - gamma P)^{-1}, normalized row vector
};

Vector uniform_distribution(int S);

DiscountedValue discounted_value(const TabularMdp& mdp, const Policy& pi, double gamma,
                                 const Vector& mu);

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const Policy& pi, double gamma,
                                   const Vector& mu);

// grad(s,a) = d(s)/(1-gamma) * Q_gamma(s,a), Q_gamma = r + gamma P V
Matrix discounted_gradient(const TabularMdp& mdp, const Policy& pi, double gamma,
                           const Vector& mu);

struct DiscountedTraceRow {
    int iter = 0;
    double value = 0.0;
    double gap = 0.0;     // mu-weighted optimal minus current value
    double bound = 0.0;   // 128 S A / (k (1-gamma)^5) * ||d_mu(pi*)/mu||_inf^2
};

struct DiscountedTrace {
    std::vector<DiscountedTraceRow> rows;
    double eta = 0.0;
};

// Projected ascent at the step size (1-gamma)^3 / (2 gamma A); the trace
// carries the known performance bound for comparison. optimal_value, when
// supplied, comes from evaluating an exact oracle policy at this gamma.
DiscountedTrace run_discounted_pga(const TabularMdp& mdp, const Policy& pi0, double gamma,
                                   const Vector& mu, int iters, double optimal_value,
                                   const Vector& d_mu_star);

struct VanishingDiscountRow {
    double gamma = 0.0;
    double scaled_value = 0.0;  // (1-gamma) * mu' V
    double rho = 0.0;
    double error = 0.0;
};

std::vector<VanishingDiscountRow> vanishing_discount_check(const TabularMdp& mdp,
                                                           const Policy& pi,
                                                           const std::vector<double>& gammas);

struct DiscountedConstants {
    double gamma = 0.0;
    double C_m_hat = 0.0;   // max ||(I - gamma P)^{-1}||_inf over sampled policies
    double C_m_hat_bound = 0.0;  // 1 / (1 - gamma)
    double L2 = 0.0;        // smoothness analogue with C_m_hat substituted
};

DiscountedConstants discounted_smoothness_constants(const TabularMdp& mdp, double gamma,
                                                    long budget = 500,
                                                    std::uint64_t seed = 7);

}  // namespace avgpg
