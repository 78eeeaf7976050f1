#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssp/mdp.hpp"

namespace ssp {

// Learner-side sufficient statistics. `visits` counts every step since the
// start of the run; the empirical model (p_hat, c_hat) is refreshed only at
// snapshot times, and `cost_since_snapshot` accumulates between them.
// Single writer (the online loop); snapshots feed immutable SkewedModels.
struct Counters {
    int num_states = 0;
    int num_actions = 0;
    std::vector<std::int64_t> visits;             // N(s,a)
    std::vector<std::int64_t> transition_counts;  // N(s,a,s'), s' includes the goal
    std::vector<double> cost_since_snapshot;      // theta(s,a)
    std::vector<std::int64_t> snapshot_visits;    // n(s,a): N at the last snapshot
    std::vector<double> p_hat;                    // rows all-zero until first snapshot
    std::vector<double> c_hat;

    Counters(int S, int A);

    int pair_index(int s, int a) const { return s * num_actions + a; }
    int row_offset(int s, int a) const { return pair_index(s, a) * (num_states + 1); }

    // Accepts costs in [0,1] (the learner perturbs before recording).
    void record_step(int s, int a, double cost, int next);

    // True when N(s,a) sits in the doubling trigger set {1, 2, 4, 8, ...}.
    bool at_trigger(int s, int a) const;

    // Refreshes the empirical model for one pair. The cost estimate averages
    // the samples gathered since the previous snapshot: 2*theta/N for N >= 2
    // (the accumulator spans the most recent half of the visits), theta
    // itself for N == 1.
    void snapshot(int s, int a);
};

enum class BonusMode {
    Standard,    // constant c2
    ScaledC2,    // c2 scaled by ln(e / (1 - max_{s,a} off-goal row mass)); tightens contraction
};

// Frozen input of one VISGO solve: empirical costs plus transitions skewed
// toward the goal, so every policy is proper in the empirical model and the
// operator below contracts. Immutable; may be solved concurrently.
struct SkewedModel {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> p_tilde;       // S*A*(S+1), rows sum to 1, goal entry >= 1/(n+1)
    std::vector<double> c_hat;         // S*A
    std::vector<std::int64_t> n_plus;  // max{n, 1}
    std::vector<double> iota;          // per-pair log confidence term
    double estimate_b = 1.0;           // value-range estimate used by the bonus
    BonusMode mode = BonusMode::Standard;
    double c2_effective = 0.0;         // c2, possibly rescaled (ScaledC2)
    double nu = 0.0;                   // min_{s,a} skewed goal probability; contraction modulus 1 - nu^2

    int pair_index(int s, int a) const { return s * num_actions + a; }
    int row_offset(int s, int a) const { return pair_index(s, a) * (num_states + 1); }
};

// Bonus constants. c1^2 == c2 is what makes the inner map monotone.
inline constexpr double kBonusC1 = 6.0;
inline constexpr double kBonusC2 = 36.0;
inline constexpr double kBonusC3 = 2.8284271247461903;  // 2*sqrt(2)
inline constexpr double kBonusC4 = 2.8284271247461903;

// Skews one empirical row toward the goal: (n/(n+1)) * p_hat + delta_goal/(n+1).
// With n == 0 the result is unit mass on the goal regardless of p_hat.
std::vector<double> skew(std::span<const double> p_hat_row, std::int64_t n);

// Variance of a value vector under a successor distribution, with the goal
// valued at zero: p v^2 - (p v)^2, clamped at 0 against round-off.
double variance(std::span<const double> p_row, std::span<const double> v);

SkewedModel build_skewed_model(const Counters& counters, double estimate_b, double delta,
                               BonusMode mode = BonusMode::Standard);

// Exploration bonus for one pair given the current value iterate.
double bonus(const SkewedModel& model, std::span<const double> v, int s, int a);

// One synchronous sweep of the optimistic operator:
//   q(s,a) = max{ c_hat + p_tilde v - bonus(v,s,a), 0 },   v'(s) = min_a q(s,a).
// All bonuses are evaluated on the same input iterate.
void apply_operator(const SkewedModel& model, std::span<const double> v,
                    std::span<double> q_out, std::span<double> v_out);

enum class VisgoStatus { Converged, RangeExceeded };

struct VisgoOutcome {
    VisgoStatus status = VisgoStatus::Converged;
    std::vector<double> q;
    std::vector<double> v;
    std::int64_t iterations = 0;
    double eps_vi = 0.0;  // effective precision used by the stopping rule
};

// Fixed-point iteration from v = 0 until the sup-norm step falls to eps_vi,
// or (when a range limit is given) until an iterate exceeds the limit, which
// reports RangeExceeded with the offending iterate. The requested precision
// is floored at a small multiple of machine epsilon: the trigger schedule
// halves eps_vi indefinitely and below float resolution the sup-norm step
// cannot reach it. Iterations are bounded by
//   ceil(ln(max{B,1}/eps) / nu^2) + 2;
// exceeding that bound means the operator failed to contract and raises an
// error, since a correctly built model makes the bound unconditional.
VisgoOutcome solve(const SkewedModel& model, double eps_vi,
                   std::optional<double> range_limit = std::nullopt);

}  // namespace ssp
