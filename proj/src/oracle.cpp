#include "ssp/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// States from which the policy's chain is absorbed in the goal almost
// surely. A state fails iff it can reach (through positive-probability
// edges of the policy) some state that cannot reach the goal at all.
std::vector<char> almost_sure_states(const SspMdp& mdp, std::span<const int> policy) {
    const int S = mdp.num_states();

    std::vector<char> reaches_goal(S, 0);
    bool grew = true;
    while (grew) {
        grew = false;
        for (int s = 0; s < S; ++s) {
            if (reaches_goal[s]) continue;
            auto row = mdp.row(s, policy[s]);
            if (row[S] > 0.0) {
                reaches_goal[s] = 1;
                grew = true;
                continue;
            }
            for (int next = 0; next < S; ++next) {
                if (row[next] > 0.0 && reaches_goal[next]) {
                    reaches_goal[s] = 1;
                    grew = true;
                    break;
                }
            }
        }
    }

    // touches_dead: can reach some state with reaches_goal == false
    std::vector<char> touches_dead(S, 0);
    for (int s = 0; s < S; ++s) touches_dead[s] = !reaches_goal[s];
    grew = true;
    while (grew) {
        grew = false;
        for (int s = 0; s < S; ++s) {
            if (touches_dead[s]) continue;
            auto row = mdp.row(s, policy[s]);
            for (int next = 0; next < S; ++next) {
                if (row[next] > 0.0 && touches_dead[next]) {
                    touches_dead[s] = 1;
                    grew = true;
                    break;
                }
            }
        }
    }

    std::vector<char> proper(S, 0);
    for (int s = 0; s < S; ++s) proper[s] = !touches_dead[s];
    return proper;
}

}  // namespace

OptimalSolution optimal_values(const SspMdp& mdp, double tol, double eta_oracle,
                               std::int64_t max_iterations) {
    if (!(tol > 0.0)) throw std::invalid_argument("optimal_values: tol must be positive");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();

    std::vector<double> cost_eta(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            cost_eta[mdp.pair_index(s, a)] = std::max(mdp.cost(s, a).mean, eta_oracle);

    OptimalSolution sol;
    sol.v_star.assign(S, 0.0);
    sol.q_star.assign(static_cast<std::size_t>(S) * A, 0.0);
    sol.pi_star.assign(S, 0);

    std::vector<double> next(S, 0.0);
    std::int64_t iter = 0;
    for (;; ++iter) {
        if (iter >= max_iterations)
            throw std::runtime_error(
                "optimal_values: iteration cap exceeded; the model likely admits no proper policy");
        double diff = 0.0;
        for (int s = 0; s < S; ++s) {
            double best = kInf;
            for (int a = 0; a < A; ++a) {
                auto row = mdp.row(s, a);
                double q = cost_eta[mdp.pair_index(s, a)];
                for (int t = 0; t < S; ++t) q += row[t] * sol.v_star[t];
                if (q < best) best = q;
            }
            next[s] = best;
            diff = std::max(diff, std::abs(next[s] - sol.v_star[s]));
        }
        sol.v_star.swap(next);
        if (diff < tol) break;
    }
    sol.iterations = iter + 1;

    for (int s = 0; s < S; ++s) {
        double best = kInf;
        int best_a = 0;
        for (int a = 0; a < A; ++a) {
            auto row = mdp.row(s, a);
            double q = cost_eta[mdp.pair_index(s, a)];
            for (int t = 0; t < S; ++t) q += row[t] * sol.v_star[t];
            sol.q_star[mdp.pair_index(s, a)] = q;
            if (q < best) {
                best = q;
                best_a = a;
            }
        }
        sol.pi_star[s] = best_a;
        sol.b_star = std::max(sol.b_star, sol.v_star[s]);
    }

    PolicyStats stats = policy_stats(mdp, sol.pi_star);
    if (!stats.proper)
        throw std::runtime_error("optimal_values: greedy policy is improper despite convergence");
    for (double t : stats.t_pi) sol.t_star = std::max(sol.t_star, t);
    return sol;
}

PolicyStats policy_stats(const SspMdp& mdp, std::span<const int> policy) {
    const int S = mdp.num_states();
    if (static_cast<int>(policy.size()) != S)
        throw std::invalid_argument("policy_stats: policy must cover every non-goal state");
    for (int s = 0; s < S; ++s)
        if (policy[s] < 0 || policy[s] >= mdp.num_actions())
            throw std::invalid_argument("policy_stats: action out of range");

    PolicyStats out;
    out.v_pi.assign(S, kInf);
    out.t_pi.assign(S, kInf);

    std::vector<char> certain = almost_sure_states(mdp, policy);
    out.proper = true;
    for (int s = 0; s < S; ++s)
        if (!certain[s]) out.proper = false;

    std::vector<int> dense_index(S, -1);
    std::vector<int> states;
    for (int s = 0; s < S; ++s) {
        if (certain[s]) {
            dense_index[s] = static_cast<int>(states.size());
            states.push_back(s);
        }
    }
    if (states.empty()) return out;

    // The almost-sure set is closed under the policy's transitions, so the
    // restricted systems (I - P_pi) v = c_pi and (I - P_pi) t = 1 are
    // well posed on it.
    const int n = static_cast<int>(states.size());
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd cost_rhs(n), time_rhs(n);
    for (int i = 0; i < n; ++i) {
        const int s = states[i];
        auto row = mdp.row(s, policy[s]);
        system(i, i) = 1.0;
        for (int next = 0; next < S; ++next) {
            if (row[next] > 0.0) system(i, dense_index[next]) -= row[next];
        }
        cost_rhs(i) = mdp.cost(s, policy[s]).mean;
        time_rhs(i) = 1.0;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd v = lu.solve(cost_rhs);
    Eigen::VectorXd t = lu.solve(time_rhs);
    if (!v.allFinite() || !t.allFinite())
        throw std::runtime_error("policy_stats: linear solve failed on an almost-sure-proper system");
    for (int i = 0; i < n; ++i) {
        out.v_pi[states[i]] = v(i);
        out.t_pi[states[i]] = t(i);
    }
    return out;
}

std::vector<double> empirical_regret(std::span<const double> episode_costs, double v_star_s0) {
    std::vector<double> regret(episode_costs.size());
    double cum = 0.0;
    for (std::size_t k = 0; k < episode_costs.size(); ++k) {
        cum += episode_costs[k];
        regret[k] = cum - static_cast<double>(k + 1) * v_star_s0;
    }
    return regret;
}

}  // namespace ssp
