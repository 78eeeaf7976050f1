#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssp/rng.hpp"

namespace ssp {

enum class CostKind { Deterministic, Bernoulli };

// Per state-action cost distribution over [0,1] with a known mean.
struct CostDistribution {
    CostKind kind = CostKind::Deterministic;
    double mean = 0.0;

    double sample(Rng& rng) const {
        if (kind == CostKind::Deterministic) return mean;
        return rng.bernoulli(mean) ? 1.0 : 0.0;
    }
};

// Cost floor applied by the learner: incurred samples are replaced by
// max{sample, eta} before entering its statistics.
struct CostPerturbation {
    double eta = 0.0;
    double apply(double cost) const { return cost > eta ? cost : eta; }
};

// Tabular goal-oriented MDP. States are 0..S-1; the goal is the virtual
// index S (one past the last state) and carries no stored row: episodes
// terminate on reaching it, and its value is implicitly zero everywhere.
// Instances are treated as immutable once built and are safe to share
// read-only across concurrent runs.
class SspMdp {
public:
    SspMdp(int num_states, int num_actions, int initial_state);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int goal_state() const { return num_states_; }
    int initial_state() const { return initial_state_; }

    // Row over successors {0..S-1, goal}; length S+1, goal last.
    std::span<const double> row(int s, int a) const {
        return {transitions_.data() + static_cast<std::size_t>(pair_index(s, a)) * (num_states_ + 1),
                static_cast<std::size_t>(num_states_ + 1)};
    }
    double transition(int s, int a, int next) const {
        return transitions_[static_cast<std::size_t>(pair_index(s, a)) * (num_states_ + 1) + next];
    }
    const CostDistribution& cost(int s, int a) const { return costs_[pair_index(s, a)]; }

    void set_row(int s, int a, std::span<const double> probs_including_goal);
    void set_cost(int s, int a, CostDistribution dist) { costs_[pair_index(s, a)] = dist; }

    int pair_index(int s, int a) const { return s * num_actions_ + a; }

private:
    int num_states_;
    int num_actions_;
    int initial_state_;
    std::vector<double> transitions_;  // S*A*(S+1), goal last in each row
    std::vector<CostDistribution> costs_;
};

struct Violation {
    enum class Kind { RowSum, ProbabilityRange, CostRange, Reachability, Structure };
    Kind kind;
    bool warning = false;  // warnings do not make the model unusable
    std::string message;
};

// Returns every invariant violation; empty means valid. Unreachable-goal
// states are reported as warnings (they break the proper-policy assumption
// but the model itself is still well formed).
std::vector<Violation> validate_mdp(const SspMdp& mdp);

bool has_errors(const std::vector<Violation>& violations);

// Samples one environment transition: cost first, then successor, so the
// draw sequence is reproducible given (seed, call sequence). The returned
// cost is already floored by the perturbation. Rejects s == goal.
std::pair<double, int> step(const SspMdp& mdp, Rng& rng, int s, int a, CostPerturbation perturb);

// As above but returns the raw sampled cost; the online loop logs raw costs
// for regret while feeding perturbed ones to the learner.
std::pair<double, int> step_raw(const SspMdp& mdp, Rng& rng, int s, int a);

// Single-action chain: from s0 the agent moves to the pre-goal state with
// probability p_min (then deterministically to the goal at cost 1) and
// otherwise around a zero-cost cycle s0 -> s1 -> ... -> s_{S-2} -> s0.
// S counts all non-goal states including the pre-goal one, so the cycle
// holds S-1 states. The optimal value is exactly 1 from every state while
// the expected time to goal scales with 1/p_min.
SspMdp make_loop_chain(int num_states, double p_min);

// Dense random instance. Each row is a normalized vector of uniform draws
// mixed with at least `goal_prob_floor` mass on the goal, which guarantees
// every policy is proper. Cost means are uniform in [cost_low, cost_high]
// and deterministic, so cost_low > 0 yields strictly positive costs.
SspMdp make_random_ssp(int num_states, int num_actions, double goal_prob_floor,
                       double cost_low, double cost_high, std::uint64_t seed);

}  // namespace ssp
