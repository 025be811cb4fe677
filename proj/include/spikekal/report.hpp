#pragma once

#include "spikekal/config.hpp"
#include "spikekal/scenarios.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace spikekal {

inline constexpr const char* kToolVersion = "0.1.0";

/// Comparison report: config echo, per-method MAE maps (full run,
/// post-warmup, autonomous-only where applicable), neurons and faults.
/// Wall times are kept out so identical runs give identical bytes.
nlohmann::json report_json(const ComparisonReport& report);

/// One row per (step, method, evaluated dim):
/// `t,method,dim,truth,obs,est,gain_0..gain_{m-1}` where the gains are the
/// row of K for that state dimension and obs is empty for unobserved dims.
void write_trace_csv(std::ostream& out, const Scenario& scenario, const ComparisonReport& report);

nlohmann::json config_json(const RunConfig& config);

}  // namespace spikekal
