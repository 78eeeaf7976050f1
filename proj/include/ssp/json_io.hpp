#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ssp/learner.hpp"
#include "ssp/mdp.hpp"
#include "ssp/oracle.hpp"
#include "ssp/visgo.hpp"

namespace ssp {

// Insertion-ordered documents keep emitted artifacts byte-stable.
using Json = nlohmann::ordered_json;

// Document layout: {S, A, s0, transitions: [s][a][s'] with the goal as the
// last column, costs: [s][a] of {kind, mean}}.
Json mdp_to_json(const SspMdp& mdp);
SspMdp mdp_from_json(const Json& doc);
SspMdp load_mdp(const std::filesystem::path& file);

Json oracle_to_json(const OptimalSolution& sol);

// Debug dump of one solve for test fixtures.
Json visgo_dump(const SkewedModel& model, const VisgoOutcome& outcome);

// Fixed 12-significant-digit decimal rendering used by every CSV artifact.
std::string format_number(double value);

}  // namespace ssp
