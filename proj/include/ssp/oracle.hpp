#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssp/mdp.hpp"

namespace ssp {

// Exact solution of the planning problem on the true model.
//
// Values are computed by value iteration on costs max{c, eta_oracle}. The
// perturbation keeps value iteration convergent on models with zero-cost
// cycles; it biases the reported values upward by at most eta_oracle * t_star.
struct OptimalSolution {
    std::vector<double> v_star;  // S entries, >= 0
    std::vector<double> q_star;  // S*A entries
    std::vector<int> pi_star;    // greedy argmin, ties to the lowest action index
    double b_star = 0.0;         // max_s v_star
    double t_star = 0.0;         // max_s expected time-to-goal of pi_star
    std::int64_t iterations = 0;
};

struct PolicyStats {
    std::vector<double> v_pi;  // expected cost-to-go; +inf where the policy is improper
    std::vector<double> t_pi;  // expected time-to-goal; +inf likewise
    bool proper = false;       // true iff the goal is reached a.s. from every state
};

OptimalSolution optimal_values(const SspMdp& mdp, double tol = 1e-10, double eta_oracle = 1e-9,
                               std::int64_t max_iterations = 1'000'000);

// Evaluates a stationary deterministic policy exactly: V and T solve the
// linear systems V = c_pi + P_pi V and T = 1 + P_pi T restricted to the
// states from which the policy reaches the goal almost surely.
PolicyStats policy_stats(const SspMdp& mdp, std::span<const int> policy);

// Cumulative regret prefixes: R_k = sum_{i<=k} cost_i - k * v_star_s0.
std::vector<double> empirical_regret(std::span<const double> episode_costs, double v_star_s0);

}  // namespace ssp
