#pragma once

#include "avgpg/chain.hpp"
#include "avgpg/mdp.hpp"

namespace avgpg {

struct AverageReward {
    double value = 0.0;  // rho^pi
};

struct DifferentialValue {
    Vector values;  // v_phi^pi, 1'v = 0
};

struct RelativeQ {
    Matrix values;     // S x A
    std::string gauge;  // shift convention, "phi" here
};

// rho = d' r^pi
AverageReward average_reward(const TabularMdp& mdp, const Policy& pi);

// v_phi = (I - Phi P)^{-1} Phi r^pi
DifferentialValue differential_value(const TabularMdp& mdp, const Policy& pi);

// Q(s,a) = r(s,a) - rho + P(.|s,a) . v_phi  (phi gauge, so pi-average of each
// Q row reproduces v_phi)
RelativeQ relative_q(const TabularMdp& mdp, const Policy& pi);

// || r^pi + P v - v - rho 1 ||_inf
double bellman_residual(const TabularMdp& mdp, const Policy& pi, const Vector& v, double rho);

}  // namespace avgpg
