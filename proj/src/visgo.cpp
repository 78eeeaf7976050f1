#include "ssp/visgo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssp {

Counters::Counters(int S, int A)
    : num_states(S),
      num_actions(A),
      visits(static_cast<std::size_t>(S) * A, 0),
      transition_counts(static_cast<std::size_t>(S) * A * (S + 1), 0),
      cost_since_snapshot(static_cast<std::size_t>(S) * A, 0.0),
      snapshot_visits(static_cast<std::size_t>(S) * A, 0),
      p_hat(static_cast<std::size_t>(S) * A * (S + 1), 0.0),
      c_hat(static_cast<std::size_t>(S) * A, 0.0) {}

void Counters::record_step(int s, int a, double cost, int next) {
    if (s < 0 || s >= num_states || a < 0 || a >= num_actions)
        throw std::invalid_argument("record_step: state-action out of range");
    if (next < 0 || next > num_states)
        throw std::invalid_argument("record_step: successor out of range");
    if (cost < 0.0 || cost > 1.0)
        throw std::invalid_argument("record_step: cost outside [0,1]");
    const int idx = pair_index(s, a);
    visits[idx] += 1;
    cost_since_snapshot[idx] += cost;
    transition_counts[row_offset(s, a) + next] += 1;
}

bool Counters::at_trigger(int s, int a) const {
    const std::int64_t n = visits[pair_index(s, a)];
    return n > 0 && (n & (n - 1)) == 0;
}

void Counters::snapshot(int s, int a) {
    const int idx = pair_index(s, a);
    const std::int64_t n = visits[idx];
    c_hat[idx] = (n >= 2) ? 2.0 * cost_since_snapshot[idx] / static_cast<double>(n)
                          : cost_since_snapshot[idx];
    cost_since_snapshot[idx] = 0.0;
    const int off = row_offset(s, a);
    for (int next = 0; next <= num_states; ++next)
        p_hat[off + next] = static_cast<double>(transition_counts[off + next]) / static_cast<double>(n);
    snapshot_visits[idx] = n;
}

std::vector<double> skew(std::span<const double> p_hat_row, std::int64_t n) {
    std::vector<double> out(p_hat_row.size(), 0.0);
    const std::size_t goal = p_hat_row.size() - 1;
    if (n <= 0) {
        out[goal] = 1.0;
        return out;
    }
    const double keep = static_cast<double>(n) / static_cast<double>(n + 1);
    for (std::size_t i = 0; i < p_hat_row.size(); ++i) out[i] = keep * p_hat_row[i];
    out[goal] += 1.0 / static_cast<double>(n + 1);
    return out;
}

double variance(std::span<const double> p_row, std::span<const double> v) {
    // v covers non-goal states; the goal (last row entry) is valued at 0.
    double mean = 0.0, second = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) {
        mean += p_row[s] * v[s];
        second += p_row[s] * v[s] * v[s];
    }
    const double out = second - mean * mean;
    return out > 0.0 ? out : 0.0;
}

SkewedModel build_skewed_model(const Counters& counters, double estimate_b, double delta,
                               BonusMode mode) {
    if (!(delta > 0.0) || delta >= 1.0)
        throw std::invalid_argument("build_skewed_model: delta must be in (0,1)");
    const int S = counters.num_states;
    const int A = counters.num_actions;
    const int width = S + 1;

    SkewedModel m;
    m.num_states = S;
    m.num_actions = A;
    m.p_tilde.assign(static_cast<std::size_t>(S) * A * width, 0.0);
    m.c_hat = counters.c_hat;
    m.n_plus.resize(static_cast<std::size_t>(S) * A);
    m.iota.resize(static_cast<std::size_t>(S) * A);
    m.estimate_b = estimate_b;
    m.mode = mode;

    const double log_base = 12.0 * S * A * width / delta;
    m.nu = 1.0;
    double max_off_goal = 0.0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const int idx = m.pair_index(s, a);
            const int off = m.row_offset(s, a);
            const std::int64_t n = counters.snapshot_visits[idx];
            m.n_plus[idx] = n > 0 ? n : 1;
            const double np = static_cast<double>(m.n_plus[idx]);
            m.iota[idx] = std::log(log_base * np * np);

            if (n <= 0) {
                m.p_tilde[off + S] = 1.0;
            } else {
                const double keep = static_cast<double>(n) / static_cast<double>(n + 1);
                for (int next = 0; next <= S; ++next)
                    m.p_tilde[off + next] = keep * counters.p_hat[off + next];
                m.p_tilde[off + S] += 1.0 / static_cast<double>(n + 1);
            }
            m.nu = std::min(m.nu, m.p_tilde[off + S]);
            for (int next = 0; next < S; ++next)
                max_off_goal = std::max(max_off_goal, m.p_tilde[off + next]);
        }
    }
    m.c2_effective = kBonusC2;
    if (mode == BonusMode::ScaledC2)
        m.c2_effective = kBonusC2 * std::log(std::exp(1.0) / (1.0 - max_off_goal));
    return m;
}

namespace {

double bonus_from_parts(const SkewedModel& m, int idx, double var) {
    const double np = static_cast<double>(m.n_plus[idx]);
    const double iota = m.iota[idx];
    const double variance_term = kBonusC1 * std::sqrt(var * iota / np);
    const double range_term = m.c2_effective * m.estimate_b * iota / np;
    const double cost_term = kBonusC3 * std::sqrt(m.c_hat[idx] * iota / np);
    const double skew_term =
        kBonusC4 * m.estimate_b * std::sqrt((m.num_states + 1) * iota) / np;
    return std::max(variance_term, range_term) + cost_term + skew_term;
}

}  // namespace

double bonus(const SkewedModel& model, std::span<const double> v, int s, int a) {
    const int idx = model.pair_index(s, a);
    const int off = model.row_offset(s, a);
    const double var =
        variance(std::span<const double>(model.p_tilde.data() + off, model.num_states + 1), v);
    return bonus_from_parts(model, idx, var);
}

void apply_operator(const SkewedModel& model, std::span<const double> v,
                    std::span<double> q_out, std::span<double> v_out) {
    const int S = model.num_states;
    const int A = model.num_actions;
    for (int s = 0; s < S; ++s) {
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
            const int idx = model.pair_index(s, a);
            const int off = model.row_offset(s, a);
            double mean = 0.0, second = 0.0;
            for (int next = 0; next < S; ++next) {
                const double p = model.p_tilde[off + next];
                mean += p * v[next];
                second += p * v[next] * v[next];
            }
            const double var = std::max(second - mean * mean, 0.0);
            double q = model.c_hat[idx] + mean - bonus_from_parts(model, idx, var);
            if (q < 0.0) q = 0.0;
            q_out[idx] = q;
            if (q < best) best = q;
        }
        v_out[s] = best;
    }
}

VisgoOutcome solve(const SkewedModel& model, double eps_vi, std::optional<double> range_limit) {
    if (!(eps_vi > 0.0)) throw std::invalid_argument("solve: eps_vi must be positive");
    const int S = model.num_states;
    const int A = model.num_actions;

    const double eps_floor =
        64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, model.estimate_b);
    const double eps = std::max(eps_vi, eps_floor);

    const double log_range = std::log(std::max(model.estimate_b, 1.0) / eps);
    const double bound_raw = std::ceil(std::max(log_range, 0.0) / (model.nu * model.nu)) + 2.0;
    const std::int64_t iteration_bound =
        bound_raw < 9.0e18 ? static_cast<std::int64_t>(bound_raw)
                           : std::numeric_limits<std::int64_t>::max();

    VisgoOutcome out;
    out.eps_vi = eps;
    out.v.assign(S, 0.0);
    out.q.assign(static_cast<std::size_t>(S) * A, 0.0);

    std::vector<double> v_next(S, 0.0);
    for (;;) {
        apply_operator(model, out.v, out.q, v_next);
        out.iterations += 1;

        if (range_limit) {
            double sup = 0.0;
            for (double x : v_next) sup = std::max(sup, x);
            if (sup > *range_limit) {
                out.v = v_next;
                out.status = VisgoStatus::RangeExceeded;
                return out;
            }
        }

        double diff = 0.0;
        for (int s = 0; s < S; ++s) diff = std::max(diff, std::abs(v_next[s] - out.v[s]));
        out.v.swap(v_next);
        if (diff <= eps) {
            out.status = VisgoStatus::Converged;
            return out;
        }
        if (out.iterations > iteration_bound)
            throw std::runtime_error(
                "visgo::solve exceeded the contraction iteration bound; the operator is not "
                "contracting as built");
    }
}

}  // namespace ssp
