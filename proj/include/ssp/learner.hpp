#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssp/mdp.hpp"
#include "ssp/visgo.hpp"

namespace ssp {

struct LearnerConfig {
    double B = 1.0;        // value-range estimate; must satisfy B >= 1
    double eta = 0.0;      // cost perturbation in [0,1]
    double delta = 0.1;    // confidence level in (0,1)
    BonusMode mode = BonusMode::Standard;
    std::int64_t episodes = 1;             // K
    std::int64_t step_cap = 10'000'000;    // global step budget; hits are flagged, not fatal
    bool record_steps = false;             // keep the raw (s,a,cost,next) log
};

struct StepRecord {
    int state;
    int action;
    double cost;  // raw incurred cost, before perturbation
    int next;
};

struct EpisodeStat {
    double cost = 0.0;          // incurred cost, the quantity regret is measured on
    std::int64_t steps = 0;
    std::int64_t replans = 0;   // VISGO solves during the episode
    double b_tilde = 1.0;       // range estimate in effect when the episode ended
};

struct PhaseRecord {
    int phase = 1;
    double b_tilde = 1.0;       // estimate during the phase (after any episode-driven raise)
    std::string exit_reason;    // cost_halt | range_halt | run_complete | step_cap
    std::int64_t episodes_spanned = 0;
    double cost = 0.0;          // perturbed cost accumulated within the phase
};

struct RunLog {
    enum class Termination { Completed, StepCapHit };

    std::vector<EpisodeStat> episodes;
    std::vector<StepRecord> steps;  // filled only when record_steps is set
    std::vector<std::pair<std::int64_t, double>> b_tilde_trajectory;  // (episode, value)
    std::vector<PhaseRecord> phases;                                  // parameter-free runs only
    Termination termination = Termination::Completed;
    std::int64_t total_steps = 0;
    double total_cost = 0.0;
    std::int64_t total_replans = 0;
};

// Greedy selection rule: index of the smallest entry, ties to the lowest
// action index.
int argmin_action(std::span<const double> q_row);

// Online state of the doubling-trigger learner: counters plus the latest
// optimistic (Q, V) tables. Exposed so the parameter-free driver and tests
// can share the exact same update path.
class LearnerCore {
public:
    LearnerCore(const SspMdp& mdp, double delta, BonusMode mode);

    // Greedy action on the optimistic Q table, ties to the lowest index.
    // Before the first solve all Q values are zero and action 0 is returned.
    int act(int s) const;

    // Records one transition; when the visit count hits the trigger set,
    // snapshots the pair and replans immediately. Returns the solve status
    // if one ran.
    std::optional<VisgoStatus> observe(int s, int a, double cost, int next, double bonus_b,
                                       std::optional<double> range_limit = std::nullopt);

    // Unconditional re-solve: bumps the trigger index j, sets eps = 2^-j and
    // runs the fixed-point iteration. Q/V are adopted even on a range halt
    // (the partial iterate is what the next phase acts on).
    VisgoStatus replan(double bonus_b, std::optional<double> range_limit = std::nullopt);

    const Counters& counters() const { return counters_; }
    Counters& counters() { return counters_; }
    const std::vector<double>& q() const { return q_; }
    const std::vector<double>& v() const { return v_; }
    std::int64_t trigger_index() const { return trigger_index_; }
    const VisgoOutcome& last_outcome() const { return last_outcome_; }

    using PlanObserver = std::function<void(const LearnerCore&)>;
    void set_plan_observer(PlanObserver obs) { observer_ = std::move(obs); }

private:
    const SspMdp* mdp_;
    double delta_;
    BonusMode mode_;
    Counters counters_;
    std::vector<double> q_;
    std::vector<double> v_;
    std::int64_t trigger_index_ = 0;
    VisgoOutcome last_outcome_;
    PlanObserver observer_;
};

// Plays `episodes` episodes from s0 with a fixed range estimate B. The run
// is deterministic given (config, mdp, seed). Requires validate_mdp to pass
// (warnings allowed).
RunLog run(const LearnerConfig& config, const SspMdp& mdp, std::uint64_t seed,
           const LearnerCore::PlanObserver& plan_observer = {});

enum class EtaKind { PositiveCosts, GeneralUnknownT, GeneralOrderT };

// Perturbation schedules for the three cost regimes: 0 for strictly positive
// costs, K^-n for general costs, (t_bar*K)^-1 when an order-accurate
// time-to-goal estimate is available.
double eta_for_config(EtaKind kind, std::int64_t episodes, double n_exponent = 2.0,
                      double t_bar = 0.0);

}  // namespace ssp
