#include <cstdint>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "friendsim/config.hpp"
#include "friendsim/harness.hpp"

namespace {

using namespace friendsim;

std::set<std::string> split_csv(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::size_t b = item.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    const std::size_t e = item.find_last_not_of(' ');
    out.insert(item.substr(b, e - b + 1));
  }
  return out;
}

int do_run(const RunConfig& config) {
  const Report report = run(config);
  std::cout << report_text(report);
  if (!config.out_path.empty()) {
    write_report(report, config.out_path);
    std::cout << "report: " << config.out_path << " (" << kReportSchema << ")\n";
    std::cout << "summary: " << config.out_path << ".txt\n";
  }
  return 0;
}

int do_replay(const std::string& report_path, std::uint64_t run_index) {
  const Report report = load_report(report_path);
  const RunTrace trace = replay(report, run_index);
  std::cout << "replay of run " << run_index << " (experiment "
            << report.experiment << ", policy " << report.config.policy.name
            << ", seed " << trace.seed << ")\n";
  for (const auto& e : trace.events) {
    std::cout << "t=" << e.time << " " << e.actor << " " << e.op_id << " "
              << e.kind;
    if (!e.variable.empty()) std::cout << " " << e.variable;
    if (!e.outcome.empty()) std::cout << ": " << e.outcome;
    if (e.probability >= 0.0) std::cout << " (p=" << e.probability << ")";
    std::cout << "\n";
  }
  if (!trace.transcript.empty()) {
    std::cout << "statements:\n";
    for (const auto& line : trace.transcript) std::cout << "  " << line << "\n";
  }
  if (!trace.struck.empty()) {
    std::cout << "struck:\n";
    for (const auto& s : trace.struck)
      std::cout << "  t=" << s.time << " " << s.agent << ": " << s.description
                << "\n";
  }
  std::cout << "verdict: " << verdict_name(trace.verdict) << "\n";
  return 0;
}

int do_render(const std::string& experiment, const std::string& script_path,
              const std::string& agent) {
  ExperimentScript script;
  if (!script_path.empty()) {
    script = load_script(script_path);
  } else if (experiment == "wigner") {
    script = script_wigner();
  } else if (experiment == "deutsch") {
    script = script_deutsch();
  } else if (experiment == "fr") {
    script = script_fr();
  } else {
    throw ConfigError("unknown experiment '" + experiment +
                      "' (wigner, deutsch, fr; use --script for custom)");
  }
  std::cout << render_view(view_diagram(script, agent));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator for observer-inclusive quantum thought experiments"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "execute an experiment");
  std::string config_path;
  std::string experiment = "fr";
  std::string script_path;
  std::string policy_name = "unitary";
  std::string classical_csv;
  std::string postselect;
  std::string mode = "sample";
  std::string out_path;
  std::uint64_t runs = 1;
  std::uint64_t seed = 0;
  run_cmd->add_option("--config", config_path,
                      "config document; other flags override its values");
  run_cmd->add_option("--experiment", experiment, "wigner | deutsch | fr | custom");
  run_cmd->add_option("--script", script_path,
                      "experiment document (implies --experiment custom)");
  run_cmd->add_option("--policy", policy_name,
                      "unitary | collapse | objective-cut | subjective-cut | "
                      "invalidation");
  run_cmd->add_option("--classical", classical_csv,
                      "objective-cut classical registers, comma-separated "
                      "(default: all memory registers)");
  run_cmd->add_option("--runs", runs, "number of runs in sample mode");
  run_cmd->add_option("--seed", seed, "master seed; run i uses sub-seed i");
  run_cmd->add_option("--postselect", postselect,
                      "keep only runs matching, e.g. \"u=ok, w=ok\"");
  run_cmd->add_option("--mode", mode, "sample | exact | matrix");
  run_cmd->add_option("--out", out_path, "write report to PATH and PATH.txt");

  auto* replay_cmd = app.add_subcommand("replay", "reproduce one recorded run");
  std::string report_path;
  std::uint64_t run_index = 0;
  replay_cmd->add_option("--report", report_path, "report document")->required();
  replay_cmd->add_option("--run", run_index, "run index")->required();

  auto* render_cmd = app.add_subcommand("render", "print one agent's circuit view");
  std::string render_experiment = "fr";
  std::string render_script;
  std::string view_agent;
  render_cmd->add_option("--experiment", render_experiment, "wigner | deutsch | fr");
  render_cmd->add_option("--script", render_script, "experiment document");
  render_cmd->add_option("--view", view_agent, "agent name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      RunConfig config;
      if (!config_path.empty()) config = load_run_config(config_path);
      if (run_cmd->count("--script") && !run_cmd->count("--experiment"))
        experiment = "custom";
      if (config_path.empty() || run_cmd->count("--experiment"))
        config.experiment = experiment;
      if (run_cmd->count("--script")) config.script_path = script_path;
      if (config_path.empty() || run_cmd->count("--policy") ||
          run_cmd->count("--classical"))
        config.policy = named_policy(
            run_cmd->count("--policy") || config_path.empty() ? policy_name
                                                              : config.policy.name,
            run_cmd->count("--classical")
                ? split_csv(classical_csv)
                : config.policy.classical_registers);
      if (config_path.empty() || run_cmd->count("--runs")) config.runs = runs;
      if (config_path.empty() || run_cmd->count("--seed")) config.seed = seed;
      if (run_cmd->count("--postselect"))
        config.postselect = parse_postselect(postselect);
      if (config_path.empty() || run_cmd->count("--mode"))
        config.mode = mode_from_name(mode);
      if (run_cmd->count("--out")) config.out_path = out_path;
      if (config.runs < 1) throw ConfigError("--runs must be >= 1");
      return do_run(config);
    }
    if (replay_cmd->parsed()) return do_replay(report_path, run_index);
    if (render_cmd->parsed())
      return do_render(render_experiment, render_script, view_agent);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
