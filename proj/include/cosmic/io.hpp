#pragma once

#include <string>

#include <json.hpp>

#include "cosmic/control.hpp"
#include "cosmic/core.hpp"
#include "cosmic/diagnostics.hpp"
#include "cosmic/sim.hpp"
#include "cosmic/solvers.hpp"

namespace cosmic::io {

using json = nlohmann::json;

/// Malformed or unreadable input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Dataset: {"p","q","N","trajectories":[{"states":[[p]...N+1],"inputs":[[q]...N]}]}
json to_json(const TrajectoryDataset& dataset);
TrajectoryDataset dataset_from_json(const json& j);

// Model: {"p","q","N","C":[[[p] x (p+q)] x N]}
json to_json(const LtvModel& model);
LtvModel model_from_json(const json& j);

// Schedule: {"scalar":v} | {"zones":[[k,v],...]} | {"per_instant":[...]}
json to_json(const LambdaSchedule& sched);
LambdaSchedule schedule_from_json(const json& j);

// Gains: {"K":[[[p] x q] x N]}
json to_json(const GainSchedule& gains);
GainSchedule gains_from_json(const json& j);

json to_json(const SolveReport& report, bool include_model = true);
json to_json(const SufficiencyReport& report);
json to_json(const TrackingStats& stats);

SmdConfig smd_from_json(const json& j);
json to_json(const SmdConfig& config);
Excitation excitation_from_json(const json& j);
LqrWeights weights_from_json(const json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Fixed-format number for CSV output ("%.12g").
std::string format_number(double v);

}  // namespace cosmic::io
