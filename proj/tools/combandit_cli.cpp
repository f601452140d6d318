// Command-line front end: run experiments from a JSON config, print lower
// bound reference curves, and report spectral constants of action sets.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "combandit/action_set.hpp"
#include "combandit/harness.hpp"

namespace {

using combandit::ActionSet;
using nlohmann::json;

int fail(const std::string& message) {
  std::cout << json{{"error", message}}.dump(2) << std::endl;
  return 1;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << content;
}

std::map<std::string, int> parse_params(const std::string& params) {
  std::map<std::string, int> out;
  std::stringstream ss(params);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("params: expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
  }
  return out;
}

int require_param(const std::map<std::string, int>& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) throw std::invalid_argument("params: missing '" + key + "'");
  return it->second;
}

int run_command(const std::string& config_path) {
  const auto cfg = combandit::load_experiment_config(config_path);
  const auto result = combandit::run_experiment(cfg);

  int failures = 0;
  for (const auto& trace : result.traces)
    if (trace.failed) {
      ++failures;
      std::cerr << "repetition failed: policy=" << trace.policy << " rep=" << trace.rep
                << ": " << trace.error << "\n";
    }

  const std::string csv = combandit::traces_csv_string(result);
  const std::string summary = combandit::summary_json(result).dump(2) + "\n";
  if (!cfg.traces_path.empty()) write_file(cfg.traces_path, csv);
  if (!cfg.epoch_counts_path.empty())
    write_file(cfg.epoch_counts_path, combandit::epoch_count_report(result).dump(2) + "\n");
  if (cfg.summary_path.empty()) {
    std::cout << summary;
  } else {
    write_file(cfg.summary_path, summary);
    json status{{"status", failures == 0 ? "ok" : "partial"},
                {"repetitions_failed", failures},
                {"summary", cfg.summary_path}};
    if (!cfg.traces_path.empty()) status["traces"] = cfg.traces_path;
    if (!cfg.epoch_counts_path.empty()) status["epoch_counts"] = cfg.epoch_counts_path;
    std::cout << status.dump(2) << std::endl;
  }
  return 0;
}

int lowerbound_command(const std::string& config_path) {
  const auto cfg = combandit::load_experiment_config(config_path);
  std::cout << combandit::lower_bound_reference(cfg).dump(2) << std::endl;
  return 0;
}

int spectral_command(const std::string& structure, const std::string& params_text) {
  const auto params = parse_params(params_text);
  combandit::StructureSpec spec;
  spec.kind = structure;
  if (structure == "m_sets" || structure == "disjoint_paths") {
    spec.d = require_param(params, "d");
    spec.m = require_param(params, "m");
  } else if (structure == "matchings") {
    spec.m = require_param(params, "m");
  } else if (structure == "spanning_trees") {
    spec.vertices = params.count("vertices") ? params.at("vertices")
                                             : require_param(params, "n");
  }
  const ActionSet set = combandit::make_action_set(spec);
  const auto constants = set.spectral_constants();
  json out{{"structure", structure},
           {"dimension", set.dimension()},
           {"arm_size", set.arm_size()},
           {"arms", set.size()},
           {"mu_min", constants.mu_min},
           {"lambda_min_nonzero", constants.lambda_lower}};
  std::cout << out.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"combandit: combinatorial semi-bandit simulator"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "run a configured experiment");
  run->add_option("--config", run_config, "experiment config JSON")->required();

  std::string lb_config;
  auto* lowerbound =
      app.add_subcommand("lowerbound", "regret lower bound for a stochastic config");
  lowerbound->add_option("--config", lb_config, "experiment config JSON")->required();

  std::string structure, params;
  auto* spectral =
      app.add_subcommand("spectral", "spectral constants of an action-set structure");
  spectral->add_option("--structure", structure,
                       "m_sets | matchings | spanning_trees | disjoint_paths")
      ->required();
  spectral->add_option("--params", params, "comma-separated key=value, e.g. d=6,m=2")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(run_config);
    if (lowerbound->parsed()) return lowerbound_command(lb_config);
    return spectral_command(structure, params);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}
