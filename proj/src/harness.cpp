#include "ssp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace ssp {

namespace {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Sample standard deviation; zero for fewer than two samples.
double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

void write_file(const std::filesystem::path& file, const std::string& contents) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << contents;
}

OracleOr parse_oracle_or(const Json& value, const char* what) {
    OracleOr out;
    if (value.is_string()) {
        if (value.get<std::string>() != "oracle")
            throw SpecError(std::string(what) + ": expected a number or \"oracle\"");
        out.from_oracle = true;
    } else if (value.is_number()) {
        out.from_oracle = false;
        out.value = value.get<double>();
    } else {
        throw SpecError(std::string(what) + ": expected a number or \"oracle\"");
    }
    return out;
}

}  // namespace

SspMdp build_env(const Json& env_doc) {
    if (!env_doc.is_object()) throw SpecError("env: expected an object");
    if (env_doc.contains("path")) {
        try {
            return load_mdp(env_doc.at("path").get<std::string>());
        } catch (const std::exception& e) {
            throw SpecError(std::string("env: ") + e.what());
        }
    }
    if (!env_doc.contains("generator")) throw SpecError("env: need \"generator\" or \"path\"");
    const std::string gen = env_doc.at("generator").get<std::string>();
    try {
        if (gen == "loop_chain")
            return make_loop_chain(env_doc.at("S").get<int>(), env_doc.at("p_min").get<double>());
        if (gen == "random_ssp")
            return make_random_ssp(env_doc.at("S").get<int>(), env_doc.at("A").get<int>(),
                                   env_doc.at("goal_prob_floor").get<double>(),
                                   env_doc.value("cost_low", 0.0), env_doc.value("cost_high", 1.0),
                                   env_doc.at("seed").get<std::uint64_t>());
    } catch (const SpecError&) {
        throw;
    } catch (const std::exception& e) {
        throw SpecError(std::string("env: ") + e.what());
    }
    throw SpecError("env: unknown generator \"" + gen + "\"");
}

ExperimentSpec parse_experiment_spec(const Json& doc) {
    if (!doc.is_object()) throw SpecError("spec: expected a JSON object");
    ExperimentSpec spec;
    try {
        spec.env = doc.at("env");
        build_env(spec.env);  // fail early on unresolvable environments

        const std::string algo = doc.at("algorithm").get<std::string>();
        if (algo == "ebssp")
            spec.algorithm = Algorithm::EbSsp;
        else if (algo == "parameter_free")
            spec.algorithm = Algorithm::ParameterFree;
        else
            throw SpecError("algorithm: expected \"ebssp\" or \"parameter_free\"");

        spec.episodes = doc.at("K").get<std::int64_t>();
        if (spec.episodes < 1) throw SpecError("K: need at least one episode");

        spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        if (spec.seeds.empty()) throw SpecError("seeds: must be non-empty");
        auto sorted = spec.seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw SpecError("seeds: must be distinct");

        if (doc.contains("B")) spec.b_estimate = parse_oracle_or(doc.at("B"), "B");

        if (doc.contains("eta")) {
            const Json& eta = doc.at("eta");
            if (eta.is_number()) {
                spec.eta.is_rule = false;
                spec.eta.value = eta.get<double>();
            } else if (eta.is_object()) {
                spec.eta.is_rule = true;
                const std::string kind = eta.at("kind").get<std::string>();
                if (kind == "positive_costs") {
                    spec.eta.kind = EtaKind::PositiveCosts;
                } else if (kind == "general_unknown_T") {
                    spec.eta.kind = EtaKind::GeneralUnknownT;
                    spec.eta.n_exponent = eta.value("n_exponent", 2.0);
                } else if (kind == "general_orderT") {
                    spec.eta.kind = EtaKind::GeneralOrderT;
                    if (eta.contains("t_bar")) spec.eta.t_bar = parse_oracle_or(eta.at("t_bar"), "t_bar");
                } else {
                    throw SpecError("eta.kind: unknown kind \"" + kind + "\"");
                }
            } else {
                throw SpecError("eta: expected a number or a rule object");
            }
        }

        spec.delta = doc.value("delta", 0.1);
        if (!(spec.delta > 0.0) || spec.delta >= 1.0) throw SpecError("delta: must be in (0,1)");
        const std::string mode = doc.value("bonus_mode", std::string("standard"));
        if (mode == "standard")
            spec.mode = BonusMode::Standard;
        else if (mode == "scaled_c2")
            spec.mode = BonusMode::ScaledC2;
        else
            throw SpecError("bonus_mode: expected \"standard\" or \"scaled_c2\"");
        spec.step_cap = doc.value("step_cap", std::int64_t{10'000'000});
        spec.x = doc.value("x", 6.0);
        spec.out_dir = doc.value("out_dir", std::string("out"));
        spec.oracle_tol = doc.value("oracle_tol", 1e-10);
        spec.oracle_eta = doc.value("eta_oracle", 1e-9);
    } catch (const SpecError&) {
        throw;
    } catch (const std::exception& e) {
        throw SpecError(std::string("spec: ") + e.what());
    }
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SpecError("cannot open spec file: " + file.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const std::exception& e) {
        throw SpecError(std::string("spec parse error: ") + e.what());
    }
    return parse_experiment_spec(doc);
}

int max_parallel_seeds() {
    if (const char* env = std::getenv("SSP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::optional<std::filesystem::path>& out_override) {
    const SspMdp mdp = build_env(spec.env);
    if (has_errors(validate_mdp(mdp))) throw SpecError("env: model fails validation");

    ExperimentResult result;
    result.out_dir = out_override.value_or(spec.out_dir);
    result.oracle = optimal_values(mdp, spec.oracle_tol, spec.oracle_eta);
    result.b_used = spec.b_estimate.from_oracle ? std::max(result.oracle.b_star, 1.0)
                                                : spec.b_estimate.value;
    if (spec.eta.is_rule) {
        const double t_bar =
            spec.eta.t_bar.from_oracle ? result.oracle.t_star : spec.eta.t_bar.value;
        result.eta_used = eta_for_config(spec.eta.kind, spec.episodes, spec.eta.n_exponent, t_bar);
    } else {
        result.eta_used = spec.eta.value;
    }

    const double v_star_s0 = result.oracle.v_star[mdp.initial_state()];
    result.seeds.resize(spec.seeds.size());

    // One task per seed; workers pull the next index. Results land in
    // per-seed slots, so output order is the spec's seed order regardless
    // of scheduling.
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= spec.seeds.size()) return;
            SeedResult& slot = result.seeds[i];
            slot.seed = spec.seeds[i];
            try {
                if (spec.algorithm == Algorithm::EbSsp) {
                    LearnerConfig cfg;
                    cfg.B = result.b_used;
                    cfg.eta = result.eta_used;
                    cfg.delta = spec.delta;
                    cfg.mode = spec.mode;
                    cfg.episodes = spec.episodes;
                    cfg.step_cap = spec.step_cap;
                    slot.log = run(cfg, mdp, slot.seed);
                } else {
                    ParameterFreeConfig cfg;
                    cfg.eta = result.eta_used;
                    cfg.delta = spec.delta;
                    cfg.mode = spec.mode;
                    cfg.episodes = spec.episodes;
                    cfg.step_cap = spec.step_cap;
                    cfg.x = spec.x;
                    slot.log = run_parameter_free(cfg, mdp, slot.seed);
                }
                std::vector<double> costs;
                costs.reserve(slot.log.episodes.size());
                for (const auto& ep : slot.log.episodes) costs.push_back(ep.cost);
                slot.regret = empirical_regret(costs, v_star_s0);
            } catch (const std::exception& e) {
                slot.failed = true;
                slot.error = e.what();
            }
        }
    };
    const int workers =
        std::min<int>(max_parallel_seeds(), static_cast<int>(spec.seeds.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Completed runs feed the statistics; failures and step-cap hits are
    // reported in the summary and excluded from regret aggregation.
    std::vector<double> final_regret;
    std::vector<const SeedResult*> completed;
    for (const auto& sr : result.seeds) {
        if (sr.failed) {
            result.any_failure = true;
            continue;
        }
        if (sr.log.termination == RunLog::Termination::StepCapHit) continue;
        completed.push_back(&sr);
        final_regret.push_back(sr.regret.back());
    }
    result.mean_final_regret = mean_of(final_regret);
    result.std_final_regret = std_of(final_regret);

    std::filesystem::create_directories(result.out_dir);

    {
        std::string csv = "seed,episode,cum_cost,cum_regret,steps,B_tilde\n";
        for (const SeedResult* sr : completed) {
            double cum_cost = 0.0;
            for (std::size_t k = 0; k < sr->log.episodes.size(); ++k) {
                const auto& ep = sr->log.episodes[k];
                cum_cost += ep.cost;
                csv += std::to_string(sr->seed);
                csv += ',';
                csv += std::to_string(k + 1);
                csv += ',';
                csv += format_number(cum_cost);
                csv += ',';
                csv += format_number(sr->regret[k]);
                csv += ',';
                csv += std::to_string(ep.steps);
                csv += ',';
                csv += format_number(ep.b_tilde);
                csv += '\n';
            }
        }
        write_file(result.out_dir / "regret.csv", csv);
    }

    {
        std::string csv = "episode,mean_regret,std_regret\n";
        if (!completed.empty()) {
            const std::size_t episodes = completed.front()->regret.size();
            std::vector<double> column(completed.size());
            for (std::size_t k = 0; k < episodes; ++k) {
                for (std::size_t i = 0; i < completed.size(); ++i)
                    column[i] = completed[i]->regret.size() > k ? completed[i]->regret[k] : 0.0;
                csv += std::to_string(k + 1);
                csv += ',';
                csv += format_number(mean_of(column));
                csv += ',';
                csv += format_number(std_of(column));
                csv += '\n';
            }
        }
        write_file(result.out_dir / "plotdata.csv", csv);
    }

    {
        const double rootK = std::sqrt(static_cast<double>(spec.episodes));
        std::vector<double> scaled;
        scaled.reserve(final_regret.size());
        for (double r : final_regret) scaled.push_back(r / rootK);

        Json summary;
        summary["algorithm"] = spec.algorithm == Algorithm::EbSsp ? "ebssp" : "parameter_free";
        summary["K"] = spec.episodes;
        summary["num_seeds"] = spec.seeds.size();
        summary["completed_seeds"] = completed.size();
        summary["v_star_s0"] = v_star_s0;
        summary["B_star"] = result.oracle.b_star;
        summary["T_star"] = result.oracle.t_star;
        if (spec.algorithm == Algorithm::EbSsp) summary["B"] = result.b_used;
        summary["eta"] = result.eta_used;
        summary["mean_RK"] = result.mean_final_regret;
        summary["std_RK"] = result.std_final_regret;
        summary["mean_RK_over_sqrtK"] = mean_of(scaled);
        summary["std_RK_over_sqrtK"] = std_of(scaled);
        if (spec.algorithm == Algorithm::ParameterFree) {
            Json phase_counts = Json::array();
            Json final_b = Json::array();
            for (const SeedResult* sr : completed) {
                phase_counts.push_back(sr->log.phases.size());
                final_b.push_back(sr->log.episodes.empty() ? 1.0
                                                           : sr->log.episodes.back().b_tilde);
            }
            summary["phase_counts"] = std::move(phase_counts);
            summary["final_B_tilde"] = std::move(final_b);
        }
        Json cap_hits = Json::array();
        for (const auto& sr : result.seeds)
            if (!sr.failed && sr.log.termination == RunLog::Termination::StepCapHit)
                cap_hits.push_back(sr.seed);
        summary["step_cap_hits"] = std::move(cap_hits);
        Json failures = Json::array();
        for (const auto& sr : result.seeds)
            if (sr.failed) failures.push_back(Json{{"seed", sr.seed}, {"error", sr.error}});
        summary["failures"] = std::move(failures);
        write_file(result.out_dir / "summary.json", summary.dump(2) + "\n");
    }

    return result;
}

SweepResult sweep(const ExperimentSpec& spec, const std::vector<std::int64_t>& k_grid,
                  const std::optional<std::filesystem::path>& out_override) {
    if (k_grid.empty()) throw SpecError("sweep: K grid must be non-empty");
    for (std::size_t i = 1; i < k_grid.size(); ++i)
        if (k_grid[i] <= k_grid[i - 1]) throw SpecError("sweep: K grid must be strictly ascending");

    const std::filesystem::path base = out_override.value_or(spec.out_dir);
    SweepResult result;
    for (std::int64_t K : k_grid) {
        ExperimentSpec point = spec;
        point.episodes = K;  // eta rules are re-resolved against each K
        ExperimentResult r =
            run_experiment(point, base / ("K_" + std::to_string(K)));
        result.any_failure = result.any_failure || r.any_failure;
        result.points.push_back({K, r.mean_final_regret, r.std_final_regret, r.any_failure});
    }

    // Least-squares fit of ln(mean regret) against ln(K); meaningful only
    // when every mean is positive.
    result.slope_defined = true;
    for (const auto& p : result.points)
        if (!(p.mean_final_regret > 0.0)) result.slope_defined = false;
    if (result.slope_defined && result.points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(result.points.size());
        for (const auto& p : result.points) {
            const double lx = std::log(static_cast<double>(p.episodes));
            const double ly = std::log(p.mean_final_regret);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        result.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else {
        result.slope_defined = false;
    }

    std::filesystem::create_directories(base);
    {
        std::string csv = "K,mean_RK,std_RK\n";
        for (const auto& p : result.points) {
            csv += std::to_string(p.episodes);
            csv += ',';
            csv += format_number(p.mean_final_regret);
            csv += ',';
            csv += format_number(p.std_final_regret);
            csv += '\n';
        }
        write_file(base / "sweep.csv", csv);
    }
    {
        Json doc;
        Json grid = Json::array();
        for (const auto& p : result.points) grid.push_back(p.episodes);
        doc["K_grid"] = std::move(grid);
        Json means = Json::array();
        for (const auto& p : result.points) means.push_back(p.mean_final_regret);
        doc["mean_RK"] = std::move(means);
        if (result.slope_defined)
            doc["loglog_slope"] = result.loglog_slope;
        else
            doc["loglog_slope"] = nullptr;
        write_file(base / "sweep_summary.json", doc.dump(2) + "\n");
    }
    return result;
}

}  // namespace ssp
