#include "spikekal/report.hpp"

#include "spikekal/text_format.hpp"

#include <ostream>
#include <sstream>

namespace spikekal {

namespace {

nlohmann::json per_dim(const std::vector<std::string>& labels, const Eigen::VectorXd& values) {
  nlohmann::json out = nlohmann::json::object();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out[labels[static_cast<std::size_t>(i)]] = values[i];
  }
  return out;
}

// Index of the observation that reads state dim `dim` directly, or -1.
Eigen::Index observed_index(const Eigen::MatrixXd& H, Eigen::Index dim) {
  for (Eigen::Index r = 0; r < H.rows(); ++r) {
    if (H(r, dim) != 0.0 && H.row(r).cwiseAbs().sum() == std::abs(H(r, dim))) {
      return r;
    }
  }
  return -1;
}

}  // namespace

nlohmann::json config_json(const RunConfig& config) {
  // Mirrors the key = value format so the two never drift apart.
  std::ostringstream text;
  write_config(text, config);
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(text.str());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

nlohmann::json report_json(const ComparisonReport& report) {
  nlohmann::json doc;
  doc["tool_version"] = kToolVersion;
  doc["config"] = config_json({report.scenario, report.spikekal});
  doc["scenario"] = scenario_name(report.scenario.name);
  doc["steps"] = report.steps;
  doc["warmup_steps"] = report.warmup_steps;
  doc["dims"] = report.dim_labels;
  doc["observation_checksum"] = report.observation_checksum;
  doc["metric"] = "mae";
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : report.methods) {
    nlohmann::json entry;
    entry["name"] = m.name;
    entry["neurons"] = m.neurons;
    entry["faults"] = m.faults;
    entry["input_checksum"] = m.input_checksum;
    if (!m.error.empty()) {
      entry["error"] = m.error;
    } else {
      entry["mae"] = per_dim(report.dim_labels, m.mae_full);
      entry["mae_post_warmup"] = per_dim(report.dim_labels, m.mae_post_warmup);
      entry["mae_autonomous"] =
          m.mae_autonomous ? per_dim(report.dim_labels, *m.mae_autonomous) : nlohmann::json(nullptr);
    }
    methods.push_back(std::move(entry));
  }
  doc["methods"] = std::move(methods);
  return doc;
}

void write_trace_csv(std::ostream& out, const Scenario& scenario, const ComparisonReport& report) {
  const Eigen::Index m = scenario.model.obs_dim();
  out << "t,method,dim,truth,obs,est";
  for (Eigen::Index j = 0; j < m; ++j) out << ",gain_" << j;
  out << '\n';
  const auto& traj = scenario.trajectory;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const std::string t = format_fixed6(traj.time(k));
    for (const auto& result : report.results) {
      if (!result.error.empty()) continue;
      for (std::size_t d = 0; d < scenario.evaluated_dims.size(); ++d) {
        const Eigen::Index dim = scenario.evaluated_dims[d];
        out << t << ',' << result.name << ',' << scenario.dim_labels[d] << ','
            << format_double(traj.truth[k][static_cast<Eigen::Index>(d)]) << ',';
        if (const Eigen::Index obs = observed_index(scenario.model.H(), dim); obs >= 0) {
          out << format_double(traj.observations[k][obs]);
        }
        out << ',' << format_double(result.estimates[k][dim]);
        const auto& K = result.gains[k].matrix();
        for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_double(K(dim, j));
        out << '\n';
      }
    }
  }
}

}  // namespace spikekal
