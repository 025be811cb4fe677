#pragma once

#include "spikekal/scenarios.hpp"
#include "spikekal/spikekal_filter.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spikekal {

/// Everything a run depends on besides the command itself.
struct RunConfig {
  ScenarioConfig scenario;
  SpikeKalConfig spikekal;
};

/// Reads `key = value` lines. `#` starts a comment, vectors are
/// comma-separated, booleans are true/false. Keys not set keep the
/// scenario defaults; unknown keys are errors. `scenario_override`
/// replaces any `scenario` key before defaults are applied.
///
/// Throws ConfigError (with line and key) or ParseError.
RunConfig parse_config(std::istream& in, std::optional<ScenarioName> scenario_override = {});
RunConfig load_config(const std::string& path, std::optional<ScenarioName> scenario_override = {});

/// Resolved config in the same format; parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const RunConfig& config);

/// Every key parse_config accepts, in write_config order.
const std::vector<std::string>& config_keys();

/// Checks both halves; throws ConfigError.
void validate(const RunConfig& config);

}  // namespace spikekal
