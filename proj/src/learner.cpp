#include "ssp/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssp {

LearnerCore::LearnerCore(const SspMdp& mdp, double delta, BonusMode mode)
    : mdp_(&mdp),
      delta_(delta),
      mode_(mode),
      counters_(mdp.num_states(), mdp.num_actions()),
      q_(static_cast<std::size_t>(mdp.num_states()) * mdp.num_actions(), 0.0),
      v_(mdp.num_states(), 0.0) {
    if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("LearnerCore: delta must be in (0,1)");
}

int argmin_action(std::span<const double> q_row) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(q_row.size()); ++a)
        if (q_row[a] < q_row[best]) best = a;
    return best;
}

int LearnerCore::act(int s) const {
    const int A = mdp_->num_actions();
    return argmin_action({q_.data() + static_cast<std::size_t>(s) * A, static_cast<std::size_t>(A)});
}

std::optional<VisgoStatus> LearnerCore::observe(int s, int a, double cost, int next, double bonus_b,
                                                std::optional<double> range_limit) {
    counters_.record_step(s, a, cost, next);
    if (!counters_.at_trigger(s, a)) return std::nullopt;
    counters_.snapshot(s, a);
    return replan(bonus_b, range_limit);
}

VisgoStatus LearnerCore::replan(double bonus_b, std::optional<double> range_limit) {
    trigger_index_ += 1;
    // 2^-j underflows to 0 past j ~ 1074; solve floors the precision anyway.
    const double eps_vi = std::max(std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(
                                                  trigger_index_, 1074))),
                                   std::numeric_limits<double>::denorm_min());
    SkewedModel model = build_skewed_model(counters_, bonus_b, delta_, mode_);
    last_outcome_ = solve(model, eps_vi, range_limit);
    q_ = last_outcome_.q;
    v_ = last_outcome_.v;
    if (observer_) observer_(*this);
    return last_outcome_.status;
}

RunLog run(const LearnerConfig& config, const SspMdp& mdp, std::uint64_t seed,
           const LearnerCore::PlanObserver& plan_observer) {
    if (config.B < 1.0) throw std::invalid_argument("run: the estimate B must be at least 1");
    if (config.eta < 0.0 || config.eta > 1.0) throw std::invalid_argument("run: eta must be in [0,1]");
    if (config.episodes < 1) throw std::invalid_argument("run: need at least one episode");
    if (config.step_cap < 1) throw std::invalid_argument("run: step cap must be positive");
    if (has_errors(validate_mdp(mdp))) throw std::invalid_argument("run: model fails validation");

    Rng rng(seed);
    LearnerCore core(mdp, config.delta, config.mode);
    if (plan_observer) core.set_plan_observer(plan_observer);
    const CostPerturbation perturb{config.eta};

    RunLog log;
    log.b_tilde_trajectory.emplace_back(1, config.B);
    for (std::int64_t k = 1; k <= config.episodes; ++k) {
        EpisodeStat ep;
        ep.b_tilde = config.B;
        int s = mdp.initial_state();
        while (s != mdp.goal_state()) {
            if (log.total_steps >= config.step_cap) {
                log.termination = RunLog::Termination::StepCapHit;
                log.episodes.push_back(ep);
                log.total_cost += ep.cost;
                log.total_replans += ep.replans;
                return log;
            }
            const int a = core.act(s);
            auto [raw_cost, next] = step_raw(mdp, rng, s, a);
            if (core.observe(s, a, perturb.apply(raw_cost), next, config.B)) ep.replans += 1;
            ep.cost += raw_cost;
            ep.steps += 1;
            log.total_steps += 1;
            if (config.record_steps) log.steps.push_back({s, a, raw_cost, next});
            s = next;
        }
        log.total_cost += ep.cost;
        log.total_replans += ep.replans;
        log.episodes.push_back(ep);
    }
    return log;
}

double eta_for_config(EtaKind kind, std::int64_t episodes, double n_exponent, double t_bar) {
    if (episodes < 1) throw std::invalid_argument("eta_for_config: need K >= 1");
    switch (kind) {
        case EtaKind::PositiveCosts:
            return 0.0;
        case EtaKind::GeneralUnknownT:
            if (!(n_exponent > 1.0))
                throw std::invalid_argument("eta_for_config: the exponent must exceed 1");
            return std::pow(static_cast<double>(episodes), -n_exponent);
        case EtaKind::GeneralOrderT:
            if (!(t_bar > 0.0)) throw std::invalid_argument("eta_for_config: t_bar must be positive");
            return 1.0 / (t_bar * static_cast<double>(episodes));
    }
    throw std::invalid_argument("eta_for_config: unknown kind");
}

}  // namespace ssp
