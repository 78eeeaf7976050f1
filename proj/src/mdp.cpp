#include "ssp/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>

namespace ssp {

namespace {

std::string pair_label(int s, int a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(s=%d, a=%d)", s, a);
    return buf;
}

}  // namespace

SspMdp::SspMdp(int num_states, int num_actions, int initial_state)
    : num_states_(num_states),
      num_actions_(num_actions),
      initial_state_(initial_state),
      transitions_(static_cast<std::size_t>(num_states) * num_actions * (num_states + 1), 0.0),
      costs_(static_cast<std::size_t>(num_states) * num_actions) {
    if (num_states < 1) throw std::invalid_argument("SspMdp: need at least one state");
    if (num_actions < 1) throw std::invalid_argument("SspMdp: need at least one action");
    if (initial_state < 0 || initial_state >= num_states)
        throw std::invalid_argument("SspMdp: initial state out of range");
}

void SspMdp::set_row(int s, int a, std::span<const double> probs_including_goal) {
    if (static_cast<int>(probs_including_goal.size()) != num_states_ + 1)
        throw std::invalid_argument("set_row: expected S+1 entries with goal last");
    double* dst = transitions_.data() + static_cast<std::size_t>(pair_index(s, a)) * (num_states_ + 1);
    for (int i = 0; i <= num_states_; ++i) dst[i] = probs_including_goal[i];
}

std::vector<Violation> validate_mdp(const SspMdp& mdp) {
    std::vector<Violation> out;
    const int S = mdp.num_states();
    const int A = mdp.num_actions();

    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            auto row = mdp.row(s, a);
            double sum = 0.0;
            bool range_ok = true;
            for (double p : row) {
                sum += p;
                if (p < 0.0 || p > 1.0) range_ok = false;
            }
            if (!range_ok)
                out.push_back({Violation::Kind::ProbabilityRange, false,
                               "transition probability outside [0,1] at " + pair_label(s, a)});
            if (std::abs(sum - 1.0) > 1e-12)
                out.push_back({Violation::Kind::RowSum, false,
                               "transition row sums to " + std::to_string(sum) + " at " + pair_label(s, a)});
            const auto& c = mdp.cost(s, a);
            if (c.mean < 0.0 || c.mean > 1.0)
                out.push_back({Violation::Kind::CostRange, false,
                               "cost mean outside [0,1] at " + pair_label(s, a)});
        }
    }

    // Backward reachability from the goal over positive-probability edges
    // under any action. States outside this set cannot reach the goal under
    // any policy, which breaks the proper-policy assumption.
    std::vector<char> reaches_goal(S, 0);
    std::queue<int> frontier;
    auto expand_to = [&](int target) {
        for (int s = 0; s < S; ++s) {
            if (reaches_goal[s]) continue;
            for (int a = 0; a < A; ++a) {
                if (mdp.transition(s, a, target) > 0.0) {
                    reaches_goal[s] = 1;
                    frontier.push(s);
                    break;
                }
            }
        }
    };
    expand_to(mdp.goal_state());
    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop();
        for (int s = 0; s < S; ++s) {
            if (reaches_goal[s]) continue;
            for (int a = 0; a < A; ++a) {
                if (mdp.transition(s, a, cur) > 0.0) {
                    reaches_goal[s] = 1;
                    frontier.push(s);
                    break;
                }
            }
        }
    }
    for (int s = 0; s < S; ++s) {
        if (!reaches_goal[s])
            out.push_back({Violation::Kind::Reachability, true,
                           "state " + std::to_string(s) + " has zero probability of ever reaching the goal"});
    }
    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    for (const auto& v : violations)
        if (!v.warning) return true;
    return false;
}

std::pair<double, int> step_raw(const SspMdp& mdp, Rng& rng, int s, int a) {
    if (s < 0 || s >= mdp.num_states())
        throw std::invalid_argument("step: state out of range (stepping from the goal is not allowed)");
    if (a < 0 || a >= mdp.num_actions()) throw std::invalid_argument("step: action out of range");
    const double cost = mdp.cost(s, a).sample(rng);
    const int next = rng.categorical(mdp.row(s, a));
    return {cost, next};
}

std::pair<double, int> step(const SspMdp& mdp, Rng& rng, int s, int a, CostPerturbation perturb) {
    auto [cost, next] = step_raw(mdp, rng, s, a);
    return {perturb.apply(cost), next};
}

SspMdp make_loop_chain(int num_states, double p_min) {
    if (num_states < 3) throw std::invalid_argument("make_loop_chain: need S >= 3");
    if (!(p_min > 0.0) || p_min > 1.0) throw std::invalid_argument("make_loop_chain: p_min must be in (0,1]");

    const int S = num_states;
    const int pre_goal = S - 1;            // the state paying cost 1 into the goal
    SspMdp mdp(S, 1, 0);
    std::vector<double> row(S + 1, 0.0);

    // s0 branches: p_min to the pre-goal state, 1-p_min into the cycle.
    row[pre_goal] = p_min;
    row[1] += 1.0 - p_min;
    mdp.set_row(0, 0, row);

    // cycle states 1..S-2 walk forward and wrap to s0
    for (int s = 1; s <= S - 2; ++s) {
        std::fill(row.begin(), row.end(), 0.0);
        row[(s == S - 2) ? 0 : s + 1] = 1.0;
        mdp.set_row(s, 0, row);
    }

    std::fill(row.begin(), row.end(), 0.0);
    row[S] = 1.0;
    mdp.set_row(pre_goal, 0, row);
    mdp.set_cost(pre_goal, 0, {CostKind::Deterministic, 1.0});
    return mdp;
}

SspMdp make_random_ssp(int num_states, int num_actions, double goal_prob_floor,
                       double cost_low, double cost_high, std::uint64_t seed) {
    if (num_states < 1 || num_actions < 1)
        throw std::invalid_argument("make_random_ssp: need S >= 1 and A >= 1");
    if (!(goal_prob_floor > 0.0) || goal_prob_floor > 1.0)
        throw std::invalid_argument("make_random_ssp: goal_prob_floor must be in (0,1]");
    if (cost_low < 0.0 || cost_high > 1.0 || cost_low > cost_high)
        throw std::invalid_argument("make_random_ssp: need 0 <= cost_low <= cost_high <= 1");

    const int S = num_states;
    Rng rng(seed);
    SspMdp mdp(S, num_actions, 0);
    std::vector<double> row(S + 1);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            double sum = 0.0;
            for (double& p : row) {
                p = rng.uniform();
                sum += p;
            }
            // Normalize, then blend with the goal so the row keeps unit mass
            // while P(goal) >= goal_prob_floor.
            for (double& p : row) p = (p / sum) * (1.0 - goal_prob_floor);
            row[S] += goal_prob_floor;
            mdp.set_row(s, a, row);
            mdp.set_cost(s, a, {CostKind::Deterministic, rng.uniform(cost_low, cost_high)});
        }
    }
    return mdp;
}

}  // namespace ssp
