#include "friendsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace friendsim {
namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fixed(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

std::set<std::string> measured_variables(const ExperimentScript& script) {
  std::set<std::string> vars;
  for (const auto& step : script.steps) {
    if (const auto* f = std::get_if<FriendMeasureAction>(&step.action))
      vars.insert(f->fm.variable);
    else if (const auto* o = std::get_if<OutsideMeasureAction>(&step.action))
      vars.insert(o->variable);
  }
  return vars;
}

bool matches(const std::map<std::string, std::string>& values,
             const std::vector<std::pair<std::string, std::string>>& event) {
  for (const auto& [var, value] : event) {
    const auto it = values.find(var);
    if (it == values.end() || it->second != value) return false;
  }
  return true;
}

std::string postselect_string(
    const std::vector<std::pair<std::string, std::string>>& event) {
  std::string out;
  for (const auto& [var, value] : event) {
    if (!out.empty()) out += ", ";
    out += var + "=" + value;
  }
  return out;
}

char verdict_char(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return 'c';
    case Verdict::Contradiction: return 'x';
    case Verdict::Aborted: return 'a';
  }
  return 'c';
}

Verdict verdict_from_char(char c) {
  if (c == 'x') return Verdict::Contradiction;
  if (c == 'a') return Verdict::Aborted;
  return Verdict::Consistent;
}

std::string cut_name(CutKind cut) {
  switch (cut) {
    case CutKind::None: return "none";
    case CutKind::Objective: return "objective";
    case CutKind::Subjective: return "subjective";
  }
  return "none";
}

CutKind cut_from_name(const std::string& name) {
  if (name == "objective") return CutKind::Objective;
  if (name == "subjective") return CutKind::Subjective;
  return CutKind::None;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Standard error of a binomial frequency estimate.
double stderr_of(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// The cut sits above every friend: all lab registers count as classical.
std::set<std::string> default_classical(const ExperimentScript& script) {
  std::set<std::string> classical;
  for (const auto& a : script.agents)
    for (const auto& r : a.lab_registers) classical.insert(r);
  return classical;
}

std::vector<Policy> stock_policies(const ExperimentScript& script) {
  return {policy_unitary(), policy_collapse(),
          policy_objective_cut(default_classical(script)),
          policy_subjective_cut(), policy_invalidation()};
}

json policy_json(const Policy& p) {
  json j;
  j["name"] = p.name;
  j["cut"] = cut_name(p.cut);
  j["classical"] = std::vector<std::string>(p.classical_registers.begin(),
                                            p.classical_registers.end());
  j["collapse-on-friend-measure"] = p.collapse_on_friend_measure;
  j["hadamard-invalidation"] = p.hadamard_invalidation;
  return j;
}

json config_json(const RunConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["script"] = c.script_path;
  j["policy"] = policy_json(c.policy);
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["postselect"] = postselect_string(c.postselect);
  j["mode"] = mode_name(c.mode);
  j["out"] = c.out_path;
  return j;
}

}  // namespace

std::uint64_t trace_digest(const RunTrace& trace) {
  std::ostringstream os;
  os << verdict_name(trace.verdict) << '\n';
  for (const auto& [var, value] : trace.values) os << var << '=' << value << '\n';
  for (const auto& line : trace.transcript) os << line << '\n';
  for (const auto& s : trace.struck)
    os << "struck " << s.agent << " t=" << s.time << ' ' << s.description << '\n';
  if (trace.violation)
    os << "violation " << trace.violation->op_id << ' ' << trace.violation->reason
       << '\n';
  for (const auto& e : trace.events)
    os << e.op_id << ':' << e.outcome << '\n';
  return fnv1a(os.str());
}

Report run(const RunConfig& config) {
  Report report;
  report.config = config;
  const ExperimentScript script = resolve_experiment(config);
  report.experiment = script.name;

  // An objective cut with no explicit register set sits above every friend:
  // all lab registers of the experiment count as classical.
  if (report.config.policy.cut == CutKind::Objective &&
      report.config.policy.classical_registers.empty())
    report.config.policy.classical_registers = default_classical(script);
  const Policy& policy = report.config.policy;

  const std::set<std::string> vars = measured_variables(script);
  for (const auto& [var, value] : config.postselect)
    if (vars.count(var) == 0)
      throw ConfigError("post-selection variable '" + var +
                        "' is not measured by experiment '" + script.name + "'");

  if (config.mode == RunMode::Exact) {
    report.exact = exact_analysis(script, policy);
    return report;
  }
  if (config.mode == RunMode::Matrix) {
    report.matrix = prediction_matrix({&script}, stock_policies(script));
    return report;
  }

  const auto views = build_views(script);
  report.runs.reserve(config.runs);
  for (std::uint64_t i = 0; i < config.runs; ++i) {
    const RunTrace trace =
        execute(script, policy, subseed(config.seed, i), views);
    report.runs.push_back({trace.verdict, trace_digest(trace)});
    if (trace.violation) {
      ++report.violations_total;
      if (report.violations.size() < kViolationCap)
        report.violations.push_back(
            "run " + std::to_string(i) + " t=" +
            std::to_string(trace.violation->time) + " " + trace.violation->op_id +
            ": " + trace.violation->reason);
    }
    if (!matches(trace.values, config.postselect)) continue;
    ++report.selected;
    for (const auto& var : script.observables) {
      const auto it = trace.values.find(var);
      ++report.counts[var][it == trace.values.end() ? "(unmeasured)"
                                                    : it->second];
    }
    if (trace.verdict == Verdict::Contradiction) ++report.contradictions;
    if (report.transcripts.size() < kTranscriptCap && !trace.transcript.empty())
      report.transcripts.push_back(trace.transcript);
  }

  if (!config.postselect.empty() && report.selected == 0) {
    const ExactAnalysis exact = exact_analysis(script, policy);
    if (exact.joint(config.postselect) <= kTolZero)
      throw ImpossibleOutcome("post-selection event '" +
                              postselect_string(config.postselect) +
                              "' has probability zero in experiment '" +
                              script.name + "'");
  }
  return report;
}

std::string report_json(const Report& report) {
  json j;
  j["schema"] = std::string(kReportSchema);
  j["rng"] = std::string(kRngAlgorithm);
  j["config"] = config_json(report.config);
  j["experiment"] = report.experiment;

  if (!report.runs.empty() || report.config.mode == RunMode::Sample) {
    json s;
    std::string verdicts;
    std::string digests;
    verdicts.reserve(report.runs.size());
    digests.reserve(report.runs.size() * 16);
    for (const auto& r : report.runs) {
      verdicts += verdict_char(r.verdict);
      digests += hex16(r.digest);
    }
    s["verdicts"] = verdicts;
    s["digests"] = digests;
    s["selected"] = report.selected;
    s["counts"] = report.counts;
    json freqs = json::object();
    for (const auto& [var, table] : report.counts) {
      json f = json::object();
      for (const auto& [label, count] : table) {
        const double p =
            static_cast<double>(count) / static_cast<double>(report.selected);
        f[label] = {{"count", count},
                    {"frequency", p},
                    {"stderr", stderr_of(p, report.selected)}};
      }
      freqs[var] = f;
    }
    s["frequencies"] = freqs;
    s["contradictions"] = report.contradictions;
    s["contradiction-rate"] =
        report.selected == 0 ? 0.0
                             : static_cast<double>(report.contradictions) /
                                   static_cast<double>(report.selected);
    s["transcripts"] = {{"total", report.selected},
                        {"shown", report.transcripts}};
    s["violations"] = {{"total", report.violations_total},
                       {"shown", report.violations}};
    j["sample"] = s;
  }

  if (report.exact) {
    json e;
    e["branches"] = json::array();
    for (const auto& b : report.exact->branches) {
      json jb;
      jb["probability"] = b.probability;
      jb["values"] = b.values;
      jb["verdict"] = verdict_name(b.verdict);
      jb["transcript"] = b.transcript;
      if (b.violation) jb["violation"] = b.violation->reason;
      e["branches"].push_back(jb);
    }
    e["contradiction-probability"] = report.exact->contradiction_probability();
    j["exact"] = e;
  }

  if (!report.matrix.empty()) {
    j["matrix"] = json::array();
    for (const auto& c : report.matrix)
      j["matrix"].push_back({{"experiment", c.script},
                             {"policy", c.policy},
                             {"observable", c.observable},
                             {"outcomes", c.value}});
  }
  return j.dump(2) + "\n";
}

std::string report_text(const Report& report) {
  std::ostringstream os;
  os << "friendsim report (" << kReportSchema << ")\n";
  os << "experiment: " << report.experiment << "\n";
  os << "policy: " << report.config.policy.name << "\n";
  os << "mode: " << mode_name(report.config.mode) << "\n";
  os << "rng: " << kRngAlgorithm << "\n";
  os << "seed: " << report.config.seed << "\n";

  if (report.config.mode == RunMode::Sample) {
    os << "runs: " << report.runs.size() << "\n";
    if (!report.config.postselect.empty()) {
      os << "post-selection: " << postselect_string(report.config.postselect)
         << " (" << report.selected << " of " << report.runs.size()
         << " runs match)\n";
    }
    os << "\noutcome frequencies";
    if (!report.config.postselect.empty()) os << " (over selected runs)";
    os << ":\n";
    for (const auto& [var, table] : report.counts) {
      os << "  " << var << ":";
      for (const auto& [label, count] : table) {
        const double p =
            static_cast<double>(count) / static_cast<double>(report.selected);
        os << "  " << label << ":" << fixed(p) << " (se "
           << fixed(stderr_of(p, report.selected)) << ")";
      }
      os << "\n";
    }
    const double rate = report.selected == 0
                            ? 0.0
                            : static_cast<double>(report.contradictions) /
                                  static_cast<double>(report.selected);
    os << "contradictions: " << report.contradictions << " of "
       << report.selected << " (rate " << fixed(rate) << ")\n";
    if (report.violations_total == 0) {
      os << "violations: none\n";
    } else {
      os << "violations: " << report.violations_total << "\n";
      for (const auto& v : report.violations) os << "  " << v << "\n";
    }
    if (!report.transcripts.empty()) {
      os << "transcripts (showing " << report.transcripts.size() << " of "
         << report.selected << "):\n";
      for (const auto& t : report.transcripts) {
        os << "  run:\n";
        for (const auto& line : t) os << "    " << line << "\n";
      }
    }
  }

  if (report.exact) {
    os << "\nexact branches:\n";
    for (const auto& b : report.exact->branches) {
      os << "  p=" << fixed(b.probability);
      for (const auto& [var, value] : b.values)
        os << " " << var << "=" << value;
      os << " verdict=" << verdict_name(b.verdict) << "\n";
    }
    os << "contradiction probability: "
       << fixed(report.exact->contradiction_probability()) << "\n";
  }

  if (!report.matrix.empty()) os << "\n" << render_prediction_matrix(report.matrix);
  return os.str();
}

void write_report(const Report& report, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write report: " + path);
    out << report_json(report);
  }
  std::ofstream out(path + ".txt", std::ios::binary);
  if (!out) throw Error("cannot write report summary: " + path + ".txt");
  out << report_text(report);
}

Report load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open report: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("bad report document " + path + ": " + e.what());
  }
  if (!j.contains("schema") || j.at("schema") != kReportSchema)
    throw ConfigError("unsupported report schema in " + path);

  Report report;
  const json& c = j.at("config");
  report.config.experiment = c.at("experiment").get<std::string>();
  report.config.script_path = c.value("script", std::string());
  const json& p = c.at("policy");
  report.config.policy.name = p.at("name").get<std::string>();
  report.config.policy.cut = cut_from_name(p.at("cut").get<std::string>());
  report.config.policy.classical_registers.clear();
  for (const auto& r : p.at("classical"))
    report.config.policy.classical_registers.insert(r.get<std::string>());
  report.config.policy.collapse_on_friend_measure =
      p.at("collapse-on-friend-measure").get<bool>();
  report.config.policy.hadamard_invalidation =
      p.at("hadamard-invalidation").get<bool>();
  report.config.runs = c.at("runs").get<std::uint64_t>();
  report.config.seed = c.at("seed").get<std::uint64_t>();
  report.config.postselect =
      parse_postselect(c.value("postselect", std::string()));
  report.config.mode = mode_from_name(c.at("mode").get<std::string>());
  report.config.out_path = c.value("out", std::string());
  report.experiment = j.value("experiment", std::string());

  if (j.contains("sample")) {
    const json& s = j.at("sample");
    const std::string verdicts = s.at("verdicts").get<std::string>();
    const std::string digests = s.at("digests").get<std::string>();
    if (digests.size() != verdicts.size() * 16)
      throw ConfigError("corrupt report: verdict/digest length mismatch");
    report.runs.reserve(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      RunSummary r;
      r.verdict = verdict_from_char(verdicts[i]);
      r.digest = std::stoull(digests.substr(i * 16, 16), nullptr, 16);
      report.runs.push_back(r);
    }
    report.selected = s.at("selected").get<std::size_t>();
    report.contradictions = s.at("contradictions").get<std::size_t>();
    report.counts =
        s.at("counts")
            .get<std::map<std::string, std::map<std::string, std::size_t>>>();
    report.transcripts = s.at("transcripts")
                             .at("shown")
                             .get<std::vector<std::vector<std::string>>>();
    report.violations_total = s.at("violations").at("total").get<std::size_t>();
    report.violations =
        s.at("violations").at("shown").get<std::vector<std::string>>();
  }
  return report;
}

RunTrace replay(const Report& report, std::uint64_t run_index) {
  if (run_index >= report.runs.size())
    throw Error("replay: run index " + std::to_string(run_index) +
                " out of range (report has " + std::to_string(report.runs.size()) +
                " runs)");
  const ExperimentScript script = resolve_experiment(report.config);
  RunTrace trace = execute(script, report.config.policy,
                           subseed(report.config.seed, run_index));
  const RunSummary& recorded = report.runs[run_index];
  if (trace.verdict != recorded.verdict || trace_digest(trace) != recorded.digest)
    throw DeterminismError(
        "replayed run " + std::to_string(run_index) +
        " does not reproduce the recorded trace (different seed, config, or "
        "build)");
  return trace;
}

CircuitView view_diagram(const ExperimentScript& script, const std::string& agent) {
  const Agent& a = find_agent(script.agents, agent);
  CircuitView view;
  view.agent = a.name;
  for (const auto& r : script.registers) {
    view.wire_order.push_back(r.name);
    view.wires[r.name] = WireKind::Quantum;
  }
  const auto classical = [&](const std::string& v) {
    return std::find(a.classical_variables.begin(), a.classical_variables.end(),
                     v) != a.classical_variables.end();
  };
  for (const auto& step : script.steps) {
    if (const auto* p = std::get_if<Prepare>(&step.action)) {
      view.gates.push_back({step.op_id, p->op.targets, true});
    } else if (const auto* f = std::get_if<FriendMeasureAction>(&step.action)) {
      view.gates.push_back({step.op_id, f->unitary.targets, true});
      // Measurement boxes carry a distinct id so view comparison matches
      // them by target set, never against the unitary of the same step.
      if (classical(f->fm.variable))
        view.gates.push_back({step.op_id + ".m", {f->fm.memory}, false});
    } else if (const auto* o = std::get_if<OutsideMeasureAction>(&step.action)) {
      if (classical(o->variable))
        view.gates.push_back({step.op_id + ".m", o->spec.targets, false});
    } else if (const auto* u = std::get_if<UndoAction>(&step.action)) {
      view.gates.push_back({step.op_id, u->op.targets, true});
    } else if (const auto* n = std::get_if<NotebookWriteAction>(&step.action)) {
      view.gates.push_back({step.op_id, n->op.targets, true});
    }
  }
  if (!a.memory_register.empty()) view.wires[a.memory_register] = WireKind::Classical;
  return view;
}

}  // namespace friendsim
