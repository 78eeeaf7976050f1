#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssp/json_io.hpp"
#include "ssp/learner.hpp"
#include "ssp/oracle.hpp"
#include "ssp/parameter_free.hpp"

namespace ssp {

// A malformed experiment description (maps to CLI exit code 2).
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algorithm { EbSsp, ParameterFree };

// Either an explicit number or "resolve from the oracle solution".
struct OracleOr {
    bool from_oracle = true;
    double value = 0.0;
};

struct EtaSpec {
    bool is_rule = false;
    double value = 0.0;  // explicit eta when !is_rule
    EtaKind kind = EtaKind::PositiveCosts;
    double n_exponent = 2.0;
    OracleOr t_bar;  // order-accurate time estimate for the orderT rule
};

struct ExperimentSpec {
    Json env;  // {"generator": ...} or {"path": ...}
    Algorithm algorithm = Algorithm::EbSsp;
    std::int64_t episodes = 1;
    std::vector<std::uint64_t> seeds;
    OracleOr b_estimate;  // ebssp only; oracle resolution uses max{B*, 1}
    EtaSpec eta;
    double delta = 0.1;
    BonusMode mode = BonusMode::Standard;
    std::int64_t step_cap = 10'000'000;
    double x = 6.0;  // parameter-free cost-halting constant
    std::filesystem::path out_dir = "out";
    double oracle_tol = 1e-10;
    double oracle_eta = 1e-9;
};

ExperimentSpec parse_experiment_spec(const Json& doc);
ExperimentSpec load_experiment_spec(const std::filesystem::path& file);

SspMdp build_env(const Json& env_doc);

struct SeedResult {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    RunLog log;
    std::vector<double> regret;  // cumulative regret prefix per episode
};

struct ExperimentResult {
    OptimalSolution oracle;
    double b_used = 0.0;    // resolved estimate (ebssp)
    double eta_used = 0.0;  // resolved perturbation
    std::vector<SeedResult> seeds;
    bool any_failure = false;
    double mean_final_regret = 0.0;  // across completed seeds
    double std_final_regret = 0.0;
    std::filesystem::path out_dir;
};

// Runs every seed (concurrently up to SSP_THREADS), computes per-episode
// regret against the cached oracle solution and writes regret.csv,
// summary.json and plotdata.csv into the output directory. Per-seed
// failures are recorded and the batch continues. Output bytes are a pure
// function of (spec, seeds).
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::optional<std::filesystem::path>& out_override = {});

struct SweepPoint {
    std::int64_t episodes = 0;
    double mean_final_regret = 0.0;
    double std_final_regret = 0.0;
    bool any_failure = false;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    bool slope_defined = false;
    double loglog_slope = 0.0;  // least-squares slope of ln(mean regret) vs ln(K)
    bool any_failure = false;
};

// Re-runs the experiment for each K in ascending order (per-K output in
// K_<value>/ subdirectories) and fits the log-log scaling of the mean final
// regret. The slope is undefined when any mean regret is non-positive.
SweepResult sweep(const ExperimentSpec& spec, const std::vector<std::int64_t>& k_grid,
                  const std::optional<std::filesystem::path>& out_override = {});

// Seed parallelism cap: SSP_THREADS when set, hardware concurrency otherwise.
int max_parallel_seeds();

}  // namespace ssp
