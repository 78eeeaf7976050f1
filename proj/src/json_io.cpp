#include "ssp/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ssp {

namespace {

std::string kind_name(CostKind kind) {
    return kind == CostKind::Deterministic ? "deterministic" : "bernoulli";
}

CostKind kind_from_name(const std::string& name) {
    if (name == "deterministic") return CostKind::Deterministic;
    if (name == "bernoulli") return CostKind::Bernoulli;
    throw std::invalid_argument("unknown cost kind: " + name);
}

}  // namespace

Json mdp_to_json(const SspMdp& mdp) {
    Json doc;
    doc["S"] = mdp.num_states();
    doc["A"] = mdp.num_actions();
    doc["s0"] = mdp.initial_state();
    Json transitions = Json::array();
    Json costs = Json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        Json t_row = Json::array();
        Json c_row = Json::array();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            auto row = mdp.row(s, a);
            t_row.push_back(Json(std::vector<double>(row.begin(), row.end())));
            const auto& c = mdp.cost(s, a);
            c_row.push_back(Json{{"kind", kind_name(c.kind)}, {"mean", c.mean}});
        }
        transitions.push_back(std::move(t_row));
        costs.push_back(std::move(c_row));
    }
    doc["transitions"] = std::move(transitions);
    doc["costs"] = std::move(costs);
    return doc;
}

SspMdp mdp_from_json(const Json& doc) {
    const int S = doc.at("S").get<int>();
    const int A = doc.at("A").get<int>();
    const int s0 = doc.at("s0").get<int>();
    SspMdp mdp(S, A, s0);
    const auto& transitions = doc.at("transitions");
    const auto& costs = doc.at("costs");
    if (static_cast<int>(transitions.size()) != S || static_cast<int>(costs.size()) != S)
        throw std::invalid_argument("mdp_from_json: transitions/costs must have S rows");
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(transitions[s].size()) != A || static_cast<int>(costs[s].size()) != A)
            throw std::invalid_argument("mdp_from_json: expected A entries per state");
        for (int a = 0; a < A; ++a) {
            auto row = transitions[s][a].get<std::vector<double>>();
            mdp.set_row(s, a, row);
            const auto& c = costs[s][a];
            mdp.set_cost(s, a, {kind_from_name(c.at("kind").get<std::string>()),
                                c.at("mean").get<double>()});
        }
    }
    return mdp;
}

SspMdp load_mdp(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open model file: " + file.string());
    Json doc = Json::parse(in);
    return mdp_from_json(doc);
}

Json oracle_to_json(const OptimalSolution& sol) {
    Json doc;
    doc["V_star"] = sol.v_star;
    doc["B_star"] = sol.b_star;
    doc["T_star"] = sol.t_star;
    doc["pi_star"] = sol.pi_star;
    doc["iterations"] = sol.iterations;
    return doc;
}

Json visgo_dump(const SkewedModel& model, const VisgoOutcome& outcome) {
    Json doc;
    doc["S"] = model.num_states;
    doc["A"] = model.num_actions;
    doc["estimate_b"] = model.estimate_b;
    doc["nu"] = model.nu;
    doc["c2_effective"] = model.c2_effective;
    doc["p_tilde"] = model.p_tilde;
    doc["c_hat"] = model.c_hat;
    doc["n_plus"] = model.n_plus;
    doc["iota"] = model.iota;
    doc["status"] = outcome.status == VisgoStatus::Converged ? "converged" : "range_exceeded";
    doc["iterations"] = outcome.iterations;
    doc["eps_vi"] = outcome.eps_vi;
    doc["q"] = outcome.q;
    doc["v"] = outcome.v;
    return doc;
}

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

}  // namespace ssp
