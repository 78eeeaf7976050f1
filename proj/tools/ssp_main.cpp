#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "ssp/harness.hpp"
#include "ssp/json_io.hpp"
#include "ssp/mdp.hpp"
#include "ssp/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpecError = 2;
constexpr int kExitSeedFailure = 3;

int cmd_validate(const std::string& file) {
    ssp::SspMdp mdp = ssp::load_mdp(file);
    const auto violations = ssp::validate_mdp(mdp);
    for (const auto& v : violations)
        std::cout << (v.warning ? "warning: " : "error: ") << v.message << "\n";
    if (violations.empty()) {
        std::cout << "ok\n";
        return kExitOk;
    }
    return ssp::has_errors(violations) ? kExitSpecError : kExitOk;
}

int cmd_oracle(const std::string& file, double tol, double eta_oracle) {
    ssp::SspMdp mdp = ssp::load_mdp(file);
    auto sol = ssp::optimal_values(mdp, tol, eta_oracle);
    std::cout << ssp::oracle_to_json(sol).dump(2) << "\n";
    return kExitOk;
}

int cmd_run(const std::string& spec_file, const std::string& out_dir) {
    ssp::ExperimentSpec spec = ssp::load_experiment_spec(spec_file);
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    auto result = ssp::run_experiment(spec, out);
    std::cout << "wrote " << (result.out_dir / "regret.csv").string() << "\n";
    std::cout << "mean R_K = " << ssp::format_number(result.mean_final_regret) << " over "
              << result.seeds.size() << " seeds\n";
    for (const auto& sr : result.seeds)
        if (sr.failed) std::cerr << "seed " << sr.seed << " failed: " << sr.error << "\n";
    return result.any_failure ? kExitSeedFailure : kExitOk;
}

int cmd_sweep(const std::string& spec_file, const std::vector<std::int64_t>& k_grid,
              const std::string& out_dir) {
    ssp::ExperimentSpec spec = ssp::load_experiment_spec(spec_file);
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    auto result = ssp::sweep(spec, k_grid, out);
    for (const auto& p : result.points)
        std::cout << "K=" << p.episodes << " mean R_K=" << ssp::format_number(p.mean_final_regret)
                  << "\n";
    if (result.slope_defined)
        std::cout << "log-log slope = " << ssp::format_number(result.loglog_slope) << "\n";
    else
        std::cout << "log-log slope undefined (non-positive mean regret)\n";
    return result.any_failure ? kExitSeedFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-shortest-path learning experiments"};
    app.require_subcommand(1);

    std::string mdp_file, spec_file, out_dir;
    double tol = 1e-10, eta_oracle = 1e-9;
    std::vector<std::int64_t> k_grid;

    auto* validate = app.add_subcommand("validate", "check a model file against its invariants");
    validate->add_option("mdp", mdp_file, "model JSON file")->required();

    auto* oracle = app.add_subcommand("oracle", "solve a model exactly and print V*, B*, T*, pi*");
    oracle->add_option("mdp", mdp_file, "model JSON file")->required();
    oracle->add_option("--tol", tol, "value-iteration stopping tolerance");
    oracle->add_option("--eta-oracle", eta_oracle, "cost floor applied by the planner");

    auto* run = app.add_subcommand("run", "run a seeded experiment batch");
    run->add_option("spec", spec_file, "experiment spec JSON file")->required();
    run->add_option("--out", out_dir, "output directory (overrides the spec)");

    auto* sweep = app.add_subcommand("sweep", "run the experiment across a grid of K values");
    sweep->add_option("spec", spec_file, "experiment spec JSON file")->required();
    sweep->add_option("--k-grid", k_grid, "ascending episode counts")->required()->delimiter(',');
    sweep->add_option("--out", out_dir, "output directory (overrides the spec)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(mdp_file);
        if (oracle->parsed()) return cmd_oracle(mdp_file, tol, eta_oracle);
        if (run->parsed()) return cmd_run(spec_file, out_dir);
        if (sweep->parsed()) return cmd_sweep(spec_file, k_grid, out_dir);
    } catch (const ssp::SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSpecError;
    }
    return kExitOk;
}
