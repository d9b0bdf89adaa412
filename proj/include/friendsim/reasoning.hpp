#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "friendsim/agents.hpp"
#include "friendsim/hilbert.hpp"

namespace friendsim {

// An agent's view circuit: the experiment as that agent describes it. Every
// measurement the agent treats as classical appears as a projective branch
// point carrying an outcome variable; everything below their cut is a plain
// unitary. Rule Q runs on this object.
//
// A documented alternative form of the self-observation rule, where
// certainty about another agent's observation directly licenses certainty
// about that agent's certainty, would shortcut the chain simulation below;
// it is not implemented.
struct ViewOp {
  enum class Kind { Unitary, Measure };
  Kind kind = Kind::Unitary;
  LinearOp op;            // Kind::Unitary
  MeasurementSpec meas;   // Kind::Measure
  std::string variable;   // outcome variable for Measure
  int time = 0;
  std::string gate_id;
};

// All outcome assignments the view can produce, with joint weights.
struct ViewBranch {
  std::map<std::string, std::string> assignment;
  double weight = 0.0;
};

struct AgentViewCircuit {
  std::string agent;
  StateVector initial;
  std::vector<ViewOp> ops;
  // Branch-table memo, filled on first use; the table only depends on the
  // ops above, so sharing it across copies is safe.
  mutable std::shared_ptr<const std::vector<ViewBranch>> branch_memo;
};

using Conditioning = std::vector<std::pair<std::string, std::string>>;

std::vector<ViewBranch> enumerate_view(const AgentViewCircuit& view);
// Memoised branch table (single-threaded use).
const std::vector<ViewBranch>& view_branches(const AgentViewCircuit& view);

// Conditional distribution of `target` given the conditioning assignment,
// by branch renormalisation. Throws ViewError when a variable is not
// measured in the view, InconsistentConditioning when the conditioning
// assignment has probability zero.
Distribution rule_q_conditional(const AgentViewCircuit& view,
                                const Conditioning& conditioning,
                                const std::string& target);

struct RuleQQuery {
  const AgentViewCircuit* view = nullptr;
  Conditioning conditioning;
  std::string target;
  int statement_time = 0;
};

// Emits "certain target=value" when the conditional reaches the certainty
// threshold; nullopt otherwise. The atom's time is the target measurement's
// view time.
std::optional<Statement> rule_q(const RuleQQuery& query);

// Rule C: strips one nesting level of a held statement and appends the
// flattened claim (provenance: adoption).
const KnowledgeEntry& rule_c(Agent& agent, const Statement& nested, int time);

// Rule S consequence check: two non-struck direct claims about the same
// variable and time with different values.
struct Contradiction {
  std::string agent;
  std::string variable;
  int time = 0;
  std::string value_a;
  std::string value_b;
};
std::optional<Contradiction> rule_s_check(const Agent& agent);
std::string render_contradiction(const Contradiction& c,
                                 const std::vector<Agent>& agents, int check_time);

// Inference choreography -----------------------------------------------

struct InferStep {
  enum class Kind { Observe, QChain, AdoptAnnounced, Check };
  Kind kind = Kind::Observe;
  std::string agent;
  int time = 0;
  // Observe / Check: the variable observed / compared.
  std::string variable;
  // QChain: infer q_target from own observations of `conditioning`; when
  // certain and chain_via is set, re-derive that agent's conclusion from the
  // inferred value, hold it as a nested statement and adopt it. With
  // `announce`, send the adopted claim on.
  std::string q_target;
  std::vector<std::string> conditioning;
  std::string chain_via;
  bool announce = false;
  std::string announce_to;  // empty = broadcast
};

struct InferenceContext {
  std::vector<Agent>* agents = nullptr;
  const std::map<std::string, AgentViewCircuit>* views = nullptr;
  const std::vector<InferStep>* schedule = nullptr;
  const ObservationLog* log = nullptr;
  std::vector<Announcement>* announcements = nullptr;
  std::vector<std::string>* transcript = nullptr;
  // Policy hook, run before adoption checks and the final comparison.
  std::function<void(int)> invalidation_hook;
};

// Simulate (without touching any knowledge base) the conclusion `agent`
// would reach from the given conditioning values, following their QChain
// step recursively. Returns the flattened (depth-0) conclusion.
std::optional<Statement> derive_conclusion(const InferenceContext& ctx,
                                           const std::string& agent,
                                           const Conditioning& conditioning);

// Execute one choreography step against live knowledge bases; returns the
// rendered statements it produced.
struct StepOutcome {
  std::vector<std::string> statements;
  std::optional<Contradiction> contradiction;
};
StepOutcome run_infer_step(InferenceContext& ctx, const InferStep& step);

// Run a whole schedule (steps in listed order) against a completed outcome
// log. protocols::execute interleaves the same steps with the physics.
struct ScheduleResult {
  std::vector<std::string> transcript;
  std::optional<Contradiction> contradiction;
};
ScheduleResult run_inference_schedule(InferenceContext& ctx);

}  // namespace friendsim
