#include "ssp/parameter_free.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssp {

double c_bound(std::int64_t k, std::int64_t t, double b_tilde, int S, int A, double delta, double x) {
    if (k < 1 || t < 1) throw std::invalid_argument("c_bound: need k >= 1 and t >= 1");
    if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("c_bound: delta must be in (0,1)");
    if (!(x > 0.0)) throw std::invalid_argument("c_bound: x must be positive");
    const double sa = static_cast<double>(S) * A;
    const double log2_term =
        std::log2(2.0 * b_tilde * static_cast<double>(t) * sa / delta);
    return static_cast<double>(k) * b_tilde +
           3.0 * x *
               (b_tilde * std::sqrt(sa * static_cast<double>(k)) * log2_term +
                b_tilde * static_cast<double>(S) * S * A * log2_term * log2_term);
}

double episode_increment(double b_tilde, std::int64_t k, int S, int A) {
    if (k < 1) throw std::invalid_argument("episode_increment: need k >= 1");
    const double raise = std::sqrt(static_cast<double>(k)) /
                         (std::pow(static_cast<double>(S), 1.5) * std::sqrt(static_cast<double>(A)));
    return std::max(b_tilde, raise);
}

namespace {

enum class PhaseExit { CostHalt, RangeHalt, RunComplete, StepCap };

const char* exit_name(PhaseExit e) {
    switch (e) {
        case PhaseExit::CostHalt: return "cost_halt";
        case PhaseExit::RangeHalt: return "range_halt";
        case PhaseExit::RunComplete: return "run_complete";
        case PhaseExit::StepCap: return "step_cap";
    }
    return "unknown";
}

}  // namespace

RunLog run_parameter_free(const ParameterFreeConfig& config, const SspMdp& mdp, std::uint64_t seed,
                          const LearnerCore::PlanObserver& plan_observer) {
    if (config.eta < 0.0 || config.eta > 1.0)
        throw std::invalid_argument("run_parameter_free: eta must be in [0,1]");
    if (config.episodes < 1) throw std::invalid_argument("run_parameter_free: need at least one episode");
    if (config.step_cap < 1) throw std::invalid_argument("run_parameter_free: step cap must be positive");
    if (!(config.x > 0.0)) throw std::invalid_argument("run_parameter_free: x must be positive");
    if (has_errors(validate_mdp(mdp)))
        throw std::invalid_argument("run_parameter_free: model fails validation");

    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const std::int64_t K = config.episodes;

    Rng rng(seed);
    LearnerCore core(mdp, config.delta, config.mode);
    if (plan_observer) core.set_plan_observer(plan_observer);
    const CostPerturbation perturb{config.eta};

    RunLog log;
    double b_tilde = 1.0;
    log.b_tilde_trajectory.emplace_back(1, b_tilde);

    std::int64_t k = 1;
    int phase_index = 1;
    std::optional<int> resume_state;  // set while an episode straddles a phase boundary
    EpisodeStat ep;

    auto flush_episode = [&]() {
        ep.b_tilde = b_tilde;
        log.total_cost += ep.cost;
        log.total_replans += ep.replans;
        log.episodes.push_back(ep);
    };

    // Statistics, the trigger index and (Q, V) all live in `core` and are
    // carried across phases untouched; only the phase cost tracker resets.
    auto run_phase = [&](double& phase_cost) -> PhaseExit {
        for (; k <= K; ++k) {
            int s;
            if (resume_state) {
                s = *resume_state;
                resume_state.reset();
            } else {
                s = mdp.initial_state();
                ep = EpisodeStat{};
            }

            const double raised = episode_increment(b_tilde, k, S, A);
            if (raised > b_tilde) {
                b_tilde = raised;
                log.b_tilde_trajectory.emplace_back(k, b_tilde);
                ep.replans += 1;
                if (core.replan(b_tilde, b_tilde) == VisgoStatus::RangeExceeded) {
                    resume_state = s;
                    return PhaseExit::RangeHalt;
                }
            }

            while (s != mdp.goal_state()) {
                if (log.total_steps >= config.step_cap) {
                    resume_state = s;
                    return PhaseExit::StepCap;
                }
                const int a = core.act(s);
                auto [raw_cost, next] = step_raw(mdp, rng, s, a);
                const double learner_cost = perturb.apply(raw_cost);
                core.counters().record_step(s, a, learner_cost, next);
                phase_cost += learner_cost;
                ep.cost += raw_cost;
                ep.steps += 1;
                log.total_steps += 1;
                if (config.record_steps) log.steps.push_back({s, a, raw_cost, next});

                // The halting comparison precedes the trigger check, so a
                // breaching step never snapshots before the phase ends.
                const double bound =
                    c_bound(k, log.total_steps + 1, b_tilde, S, A, config.delta, config.x);
                if (phase_cost > bound) {
                    resume_state = next;
                    return PhaseExit::CostHalt;
                }
                if (core.counters().at_trigger(s, a)) {
                    core.counters().snapshot(s, a);
                    ep.replans += 1;
                    if (core.replan(b_tilde, b_tilde) == VisgoStatus::RangeExceeded) {
                        resume_state = next;
                        return PhaseExit::RangeHalt;
                    }
                }
                s = next;
            }
            flush_episode();
        }
        return PhaseExit::RunComplete;
    };

    for (;;) {
        const std::int64_t phase_start = k;
        double phase_cost = 0.0;
        const PhaseExit exit = run_phase(phase_cost);
        log.phases.push_back({phase_index, b_tilde, exit_name(exit),
                              std::min(k, K) - phase_start + 1, phase_cost});
        if (exit == PhaseExit::RunComplete) break;
        if (exit == PhaseExit::StepCap) {
            log.termination = RunLog::Termination::StepCapHit;
            flush_episode();  // partial episode, flagged by the termination status
            return log;
        }
        b_tilde *= 2.0;
        log.b_tilde_trajectory.emplace_back(k, b_tilde);
        phase_index += 1;
    }
    return log;
}

}  // namespace ssp
