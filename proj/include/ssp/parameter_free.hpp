#pragma once

#include <cstdint>

#include "ssp/learner.hpp"

namespace ssp {

struct ParameterFreeConfig {
    double eta = 0.0;
    double delta = 0.1;
    BonusMode mode = BonusMode::Standard;
    std::int64_t episodes = 1;           // K
    std::int64_t step_cap = 10'000'000;
    bool record_steps = false;
    double x = 6.0;  // absolute constant in the cost-halting threshold
};

// Cumulative-cost halting threshold of a phase running with estimate
// b_tilde at episode k and time step t:
//   k*B + 3x * ( B*sqrt(SAk)*log2(2Btsa/delta) + B*S^2*A*log2^2(2BtSA/delta) ).
// Monotone in k, t and b_tilde.
double c_bound(std::int64_t k, std::int64_t t, double b_tilde, int S, int A, double delta, double x);

// Episode-driven raise of the estimate: max{b_tilde, sqrt(k) / (S^{3/2} A^{1/2})}.
double episode_increment(double b_tilde, std::int64_t k, int S, int A);

// Parameter-free run: starts with estimate 1 and runs phases that halt when
// either the phase's cumulative (perturbed) cost exceeds c_bound or a solve
// iterate exceeds the current estimate; each halt doubles the estimate and
// the next phase resumes from the current state, reusing all statistics.
// At every episode start the estimate additionally takes the episode-driven
// raise, re-solving immediately when it strictly increases.
RunLog run_parameter_free(const ParameterFreeConfig& config, const SspMdp& mdp, std::uint64_t seed,
                          const LearnerCore::PlanObserver& plan_observer = {});

}  // namespace ssp
