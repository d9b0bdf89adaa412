#include "friendsim/policies.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "friendsim/protocols.hpp"

namespace friendsim {

Policy policy_unitary() {
  Policy p;
  p.name = "unitary";
  return p;
}

Policy policy_collapse() {
  Policy p;
  p.name = "collapse";
  p.collapse_on_friend_measure = true;
  return p;
}

Policy policy_objective_cut(std::set<std::string> classical_registers) {
  Policy p;
  p.name = "objective-cut";
  p.cut = CutKind::Objective;
  p.classical_registers = std::move(classical_registers);
  return p;
}

Policy policy_subjective_cut() {
  Policy p;
  p.name = "subjective-cut";
  p.cut = CutKind::Subjective;
  return p;
}

Policy policy_invalidation() {
  Policy p;
  p.name = "invalidation";
  p.hadamard_invalidation = true;
  return p;
}

Policy named_policy(const std::string& name,
                    std::set<std::string> classical_registers) {
  if (name == "unitary") return policy_unitary();
  if (name == "collapse") return policy_collapse();
  if (name == "objective-cut")
    return policy_objective_cut(std::move(classical_registers));
  if (name == "subjective-cut") return policy_subjective_cut();
  if (name == "invalidation") return policy_invalidation();
  throw InvalidSpec("unknown policy: " + name);
}

Legality legal(const Policy& policy, const ActionContext& ctx) {
  if (ctx.kind != ActionContext::Kind::OutsideMeasure) return {true, ""};
  if (policy.cut == CutKind::Objective) {
    for (const auto& t : ctx.targets)
      if (policy.classical_registers.count(t))
        return {false, "measurement of " + t +
                           " in a non-classical basis is ill-defined under an "
                           "objective cut"};
  } else if (policy.cut == CutKind::Subjective) {
    for (const auto& t : ctx.targets)
      if (std::find(ctx.actor_lab.begin(), ctx.actor_lab.end(), t) !=
          ctx.actor_lab.end())
        return {false, ctx.actor + " cannot measure their own lab register " + t +
                           " from outside"};
  }
  return {true, ""};
}

bool collapses_friend_measure(const Policy& policy, const FriendMeasurement& fm) {
  if (policy.collapse_on_friend_measure) return true;
  return policy.cut == CutKind::Objective &&
         policy.classical_registers.count(fm.memory) > 0;
}

SampleResult apply_collapse(const Policy& policy, const StateVector& state,
                            const FriendMeasurement& fm,
                            const std::vector<RegisterSpec>& regs,
                            SplitMix64& rng) {
  if (!collapses_friend_measure(policy, fm)) {
    SampleResult r;
    r.outcome = "";
    r.probability = 1.0;
    r.post = state;
    return r;
  }
  return measure_sample(state, memory_readout(fm, regs), rng);
}

std::vector<StruckRecord> invalidate_on_hadamarding(
    const Policy& policy, std::vector<Agent>& agents,
    const std::vector<HadamardEvent>& events, int now) {
  std::vector<StruckRecord> out;
  if (!policy.hadamard_invalidation) return out;
  std::set<std::string> tainted;
  for (const auto& ev : events)
    if (ev.time <= now) tainted.insert(ev.agent);
  if (tainted.empty()) return out;
  for (auto& agent : agents) {
    for (auto& entry : agent.knowledge) {
      if (entry.struck) continue;
      const bool hit = std::any_of(
          entry.statement.derivation.begin(), entry.statement.derivation.end(),
          [&](const std::string& a) { return tainted.count(a) > 0; });
      if (!hit) continue;
      out.push_back({agent.name, now, describe_entry(entry)});
      entry.struck = true;
      entry.struck_at = now;
    }
  }
  return out;
}

namespace {

std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", p);
  return buf;
}

}  // namespace

std::vector<MatrixCell> prediction_matrix(
    const std::vector<const ExperimentScript*>& scripts,
    const std::vector<Policy>& policies) {
  std::vector<MatrixCell> cells;
  for (const auto* script : scripts) {
    for (const auto& policy : policies) {
      const ExactAnalysis analysis = exact_analysis(*script, policy);
      for (const auto& observable : script->observables) {
        const Distribution dist = analysis.marginal(observable);
        double unmeasured = 0.0;
        for (const auto& [label, p] : dist)
          if (label == "(unmeasured)") unmeasured += p;
        std::string value;
        if (unmeasured >= 1.0 - kTolDistribution) {
          value = "disallowed";
        } else {
          std::ostringstream os;
          bool first = true;
          for (const auto& [label, p] : dist) {
            if (!first) os << ' ';
            first = false;
            os << label << ':' << format_probability(p);
          }
          value = os.str();
        }
        cells.push_back({script->name, policy.name, observable, value});
      }
    }
  }
  return cells;
}

std::string render_prediction_matrix(const std::vector<MatrixCell>& cells) {
  const std::vector<std::string> header = {"experiment", "policy", "observable",
                                           "outcomes"};
  std::vector<std::size_t> width = {header[0].size(), header[1].size(),
                                    header[2].size(), header[3].size()};
  for (const auto& c : cells) {
    width[0] = std::max(width[0], c.script.size());
    width[1] = std::max(width[1], c.policy.size());
    width[2] = std::max(width[2], c.observable.size());
    width[3] = std::max(width[3], c.value.size());
  }
  const auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w - s.size(), ' ');
  };
  std::ostringstream os;
  os << pad(header[0], width[0]) << "  " << pad(header[1], width[1]) << "  "
     << pad(header[2], width[2]) << "  " << header[3] << '\n';
  for (const auto& c : cells)
    os << pad(c.script, width[0]) << "  " << pad(c.policy, width[1]) << "  "
       << pad(c.observable, width[2]) << "  " << c.value << '\n';
  return os.str();
}

}  // namespace friendsim
