#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ssp/mdp.hpp"
#include "ssp/oracle.hpp"
#include "test_util.hpp"

using namespace ssp;

namespace {

// Three states, two actions, every deterministic policy proper. Used as the
// hand-checked planning instance: the expected values come from enumerating
// all eight policies with an independent linear solve.
SspMdp hand_mdp() {
    SspMdp mdp(3, 2, 0);
    auto set = [&](int s, int a, std::initializer_list<double> probs, double cost) {
        mdp.set_row(s, a, std::vector<double>(probs));
        mdp.set_cost(s, a, {CostKind::Deterministic, cost});
    };
    set(0, 0, {0.1, 0.5, 0.2, 0.2}, 0.5);
    set(0, 1, {0.0, 0.0, 0.1, 0.9}, 0.9);
    set(1, 0, {0.3, 0.3, 0.2, 0.2}, 0.2);
    set(1, 1, {0.0, 0.5, 0.0, 0.5}, 0.4);
    set(2, 0, {0.0, 0.0, 0.5, 0.5}, 1.0);
    set(2, 1, {0.4, 0.3, 0.3, 0.0}, 0.1);
    return mdp;
}

SspMdp two_step_chain() {
    SspMdp mdp(2, 1, 0);
    std::vector<double> row = {0.0, 1.0, 0.0};
    mdp.set_row(0, 0, row);
    row = {0.0, 0.0, 1.0};
    mdp.set_row(1, 0, row);
    mdp.set_cost(0, 0, {CostKind::Deterministic, 0.5});
    mdp.set_cost(1, 0, {CostKind::Deterministic, 0.5});
    return mdp;
}

}  // namespace

TEST_CASE("one-state one-step model") {
    SspMdp mdp(1, 1, 0);
    std::vector<double> row = {0.0, 1.0};
    mdp.set_row(0, 0, row);
    mdp.set_cost(0, 0, {CostKind::Deterministic, 0.4});
    auto sol = optimal_values(mdp);
    CHECK(sol.v_star[0] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(sol.b_star == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(sol.t_star == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hand instance matches brute-force policy enumeration") {
    auto mdp = hand_mdp();
    auto sol = optimal_values(mdp, 1e-12);
    auto expected = testutil::optimal_values_by_enumeration(mdp);
    for (int s = 0; s < 3; ++s) CHECK(sol.v_star[s] == doctest::Approx(expected[s]).epsilon(1e-6));
    // bellman consistency of the reported tables
    for (int s = 0; s < 3; ++s) {
        double best = sol.q_star[mdp.pair_index(s, 0)];
        for (int a = 1; a < 2; ++a) best = std::min(best, sol.q_star[mdp.pair_index(s, a)]);
        CHECK(sol.v_star[s] == doctest::Approx(best).epsilon(1e-9));
    }
    CHECK(sol.b_star >= sol.v_star[0]);
    CHECK(sol.b_star <= sol.t_star);
}

TEST_CASE("policy evaluation on a deterministic two-step chain") {
    auto mdp = two_step_chain();
    std::vector<int> pi = {0, 0};
    auto stats = policy_stats(mdp, pi);
    CHECK(stats.proper);
    CHECK(stats.v_pi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats.t_pi[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(stats.v_pi[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("self-looping policy is reported improper") {
    SspMdp mdp(2, 2, 0);
    std::vector<double> self_loop = {1.0, 0.0, 0.0};
    std::vector<double> to_goal = {0.0, 0.0, 1.0};
    mdp.set_row(0, 0, self_loop);
    mdp.set_row(0, 1, to_goal);
    std::vector<double> row1 = {0.0, 0.0, 1.0};
    mdp.set_row(1, 0, row1);
    mdp.set_row(1, 1, row1);
    std::vector<int> pi = {0, 0};  // spins forever on state 0
    auto stats = policy_stats(mdp, pi);
    CHECK(!stats.proper);
    CHECK(std::isinf(stats.v_pi[0]));
    CHECK(std::isinf(stats.t_pi[0]));
    // state 1 still reaches the goal almost surely under this policy
    CHECK(stats.t_pi[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("greedy policy evaluation agrees with the value solver") {
    auto mdp = make_random_ssp(4, 2, 0.15, 0.0, 1.0, 3);
    auto sol = optimal_values(mdp, 1e-12);
    auto stats = policy_stats(mdp, sol.pi_star);
    REQUIRE(stats.proper);
    for (int s = 0; s < 4; ++s) CHECK(stats.v_pi[s] == doctest::Approx(sol.v_star[s]).epsilon(1e-6));
}

TEST_CASE("regret prefixes") {
    SUBCASE("playing at the optimal value gives zero regret") {
        std::vector<double> costs = {1.5, 1.5, 1.5};
        auto r = empirical_regret(costs, 1.5);
        for (double x : r) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("constant excess accumulates linearly") {
        std::vector<double> costs = {2.0, 2.0};
        auto r = empirical_regret(costs, 1.0);
        REQUIRE(r.size() == 2);
        CHECK(r[0] == doctest::Approx(1.0));
        CHECK(r[1] == doctest::Approx(2.0));
    }
}

TEST_CASE("bellman residual of the returned values is small") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        auto mdp = make_random_ssp(6, 3, 0.1, 0.0, 1.0, seed);
        const double tol = 1e-10, eta = 1e-9;
        auto sol = optimal_values(mdp, tol, eta);
        double residual = 0.0;
        for (int s = 0; s < 6; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < 3; ++a) {
                double q = std::max(mdp.cost(s, a).mean, eta);
                auto row = mdp.row(s, a);
                for (int t = 0; t < 6; ++t) q += row[t] * sol.v_star[t];
                best = std::min(best, q);
            }
            residual = std::max(residual, std::abs(sol.v_star[s] - best));
        }
        CHECK(residual < 10 * tol);
    }
}

TEST_CASE("greedy policy values stay within the perturbation bias") {
    for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
        auto mdp = make_random_ssp(5, 2, 0.1, 0.0, 1.0, seed);
        const double tol = 1e-10, eta = 1e-9;
        auto sol = optimal_values(mdp, tol, eta);
        auto stats = policy_stats(mdp, sol.pi_star);
        REQUIRE(stats.proper);
        for (int s = 0; s < 5; ++s)
            CHECK(stats.v_pi[s] <= sol.v_star[s] + eta * stats.t_pi[s] + 10 * tol);
    }
}

TEST_CASE("expected hitting time matches simulated rollouts") {
    auto mdp = make_loop_chain(5, 0.2);
    std::vector<int> pi(5, 0);
    auto stats = policy_stats(mdp, pi);

    Rng rng(123);
    const int rollouts = 100'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < rollouts; ++i) {
        int s = 0;
        std::int64_t len = 0;
        while (s != mdp.goal_state()) {
            s = rng.categorical(mdp.row(s, 0));
            ++len;
        }
        sum += static_cast<double>(len);
        sumsq += static_cast<double>(len) * len;
    }
    const double mean = sum / rollouts;
    const double var = (sumsq - rollouts * mean * mean) / (rollouts - 1);
    const double stderr_mean = std::sqrt(var / rollouts);
    CHECK(std::abs(mean - stats.t_pi[0]) <= 3.0 * stderr_mean);
}

TEST_CASE("iteration cap reports an unusable model") {
    SspMdp mdp(1, 1, 0);
    std::vector<double> row = {1.0, 0.0};  // self loop, goal unreachable
    mdp.set_row(0, 0, row);
    mdp.set_cost(0, 0, {CostKind::Deterministic, 0.5});
    CHECK_THROWS_AS(optimal_values(mdp, 1e-10, 1e-9, 10'000), std::runtime_error);
}
