#include "spikekal/config.hpp"

#include "spikekal/errors.hpp"
#include "spikekal/text_format.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

namespace spikekal {

namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

double to_double(const Entry& e, const std::string& key) {
  try {
    return parse_double(e.value, e.line);
  } catch (const ParseError&) {
    throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                      "' expects a number, got '" + e.value + "'");
  }
}

template <typename Int>
Int to_integer(const Entry& e, const std::string& key) {
  Int value{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("line " + std::to_string(e.line) + ": key '" + key + "' expects an integer");
  }
  return value;
}

bool to_bool(const Entry& e, const std::string& key) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                    "' expects true or false");
}

std::vector<double> to_vector(const Entry& e, const std::string& key) {
  std::vector<double> out;
  for (const auto& field : split_csv_line(e.value)) {
    out.push_back(to_double({field, e.line}, key));
  }
  return out;
}

std::string vector_text(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i == 0 ? "" : ", ") + format_double(values[i]);
  }
  return out;
}

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const Entry&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SK_NUMBER(key, field)                                                          \
  KeySpec {                                                                            \
    key, [](RunConfig& c, const Entry& e) { c.field = to_double(e, key); },             \
        [](const RunConfig& c) { return format_double(c.field); }                     \
  }
#define SK_INT(key, field, type)                                                       \
  KeySpec {                                                                            \
    key, [](RunConfig& c, const Entry& e) { c.field = to_integer<type>(e, key); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                    \
  }
#define SK_BOOL(key, field)                                                            \
  KeySpec {                                                                            \
    key, [](RunConfig& c, const Entry& e) { c.field = to_bool(e, key); },               \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }    \
  }
#define SK_VECTOR(key, field)                                                          \
  KeySpec {                                                                            \
    key, [](RunConfig& c, const Entry& e) { c.field = to_vector(e, key); },             \
        [](const RunConfig& c) { return vector_text(c.field); }                       \
  }

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs{
      // `scenario` is resolved before everything else.
      KeySpec{"scenario", [](RunConfig&, const Entry&) {},
              [](const RunConfig& c) { return std::string(scenario_name(c.scenario.name)); }},
      SK_NUMBER("dt", scenario.dt),
      SK_NUMBER("duration", scenario.duration),
      SK_VECTOR("q_diag", scenario.q_diag),
      SK_VECTOR("r_diag", scenario.r_diag),
      SK_VECTOR("x0", scenario.x0),
      SK_INT("seed", scenario.seed, std::uint64_t),
      SK_NUMBER("mismatch_q_scale", scenario.mismatch_q_scale),
      SK_NUMBER("mismatch_r_scale", scenario.mismatch_r_scale),
      SK_NUMBER("warmup_fraction", scenario.warmup_fraction),
      KeySpec{"uav_csv", [](RunConfig& c, const Entry& e) { c.scenario.csv_path = e.value; },
              [](const RunConfig& c) { return c.scenario.csv_path; }},
      SK_INT("teacher_steps", spikekal.teacher_steps, int),
      SK_INT("snn_substeps", spikekal.snn_substeps, int),
      SK_NUMBER("input_gain", spikekal.input_gain),
      SK_NUMBER("tau_membrane", spikekal.lif.tau_membrane),
      SK_NUMBER("tau_input", spikekal.lif.tau_input),
      SK_NUMBER("tau_current", spikekal.lif.tau_current),
      SK_NUMBER("v_rest", spikekal.lif.v_rest),
      SK_NUMBER("v_thresh", spikekal.lif.v_thresh),
      SK_NUMBER("v_reset", spikekal.lif.v_reset),
      SK_NUMBER("a_plus", spikekal.plasticity.a_plus),
      SK_NUMBER("a_minus", spikekal.plasticity.a_minus),
      SK_NUMBER("tau_plus", spikekal.plasticity.tau_plus),
      SK_NUMBER("tau_minus", spikekal.plasticity.tau_minus),
      SK_NUMBER("stdp_lr", spikekal.plasticity.lr),
      SK_NUMBER("w_min", spikekal.plasticity.w_min),
      SK_NUMBER("w_max", spikekal.plasticity.w_max),
      SK_NUMBER("w_init_max", spikekal.w_init_max),
      SK_NUMBER("tau_elig", spikekal.tau_elig),
      SK_NUMBER("reward_scale", spikekal.reward_scale),
      SK_BOOL("global_reward", spikekal.global_reward),
      SK_NUMBER("tau_decoder", spikekal.decoder.tau_dec),
      SK_NUMBER("lms_rate", spikekal.decoder.lms_rate),
      SK_NUMBER("decoder_initial_gain", spikekal.decoder.initial_gain),
      SK_NUMBER("decoder_initial_bias", spikekal.decoder.initial_bias),
      SK_BOOL("post_teacher_adapt", spikekal.post_teacher_adapt),
      SK_NUMBER("early_stop_error", spikekal.early_stop_error),
      SK_INT("early_stop_window", spikekal.early_stop_window, int),
  };
  return specs;
}

#undef SK_NUMBER
#undef SK_INT
#undef SK_BOOL
#undef SK_VECTOR

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& spec : key_specs()) out.push_back(spec.name);
    return out;
  }();
  return keys;
}

void validate(const RunConfig& config) {
  config.scenario.validate();
  config.spikekal.validate();
  LifParams lif = config.spikekal.lif;
  lif.dt = config.scenario.dt / config.spikekal.snn_substeps;
  lif.validate();
}

RunConfig parse_config(std::istream& in, std::optional<ScenarioName> scenario_override) {
  std::map<std::string, Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    bool known = false;
    for (const auto& spec : key_specs()) known = known || spec.name == key;
    if (!known) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (entries.count(key) != 0) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    entries[key] = {value, line_no};
  }

  ScenarioName name = ScenarioName::linear_motion;
  if (scenario_override) {
    name = *scenario_override;
  } else if (const auto it = entries.find("scenario"); it != entries.end()) {
    try {
      name = parse_scenario_name(it->second.value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(it->second.line) + ": " + e.what());
    }
  }
  RunConfig config{ScenarioConfig::defaults(name), SpikeKalConfig{}};
  for (const auto& spec : key_specs()) {
    if (const auto it = entries.find(spec.name); it != entries.end()) {
      spec.set(config, it->second);
    }
  }
  config.spikekal.seed = config.scenario.seed;
  return config;
}

RunConfig load_config(const std::string& path, std::optional<ScenarioName> scenario_override) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  return parse_config(in, scenario_override);
}

void write_config(std::ostream& out, const RunConfig& config) {
  for (const auto& spec : key_specs()) {
    const std::string value = spec.get(config);
    if (spec.name == "uav_csv" && value.empty()) continue;
    out << spec.name << " = " << value << '\n';
  }
}

}  // namespace spikekal
