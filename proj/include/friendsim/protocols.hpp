#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "friendsim/circuit.hpp"
#include "friendsim/policies.hpp"
#include "friendsim/reasoning.hpp"

namespace friendsim {

// Script actions --------------------------------------------------------

struct Prepare {
  LinearOp op;
  std::string description;
};

struct FriendMeasureAction {
  FriendMeasurement fm;
  LinearOp unitary;  // square extension built once at script construction
};

struct SendAction {
  std::string reg;
  std::string from;
  std::string to;
};

struct OutsideMeasureAction {
  MeasurementSpec spec;
  std::string variable;
  // Agents whose labs this measurement disturbs (their inferences become
  // suspect under the invalidation policy).
  std::vector<std::string> hadamarded_agents;
};

struct UndoAction {
  LinearOp op;
  std::string agent;  // whose measurement is reverted
};

struct NotebookWriteAction {
  LinearOp op;
};

struct InferAction {
  std::vector<InferStep> steps;
};

struct AnnounceAction {
  std::string from;
  std::string to;        // empty = broadcast
  std::string variable;  // announce the latest conclusion about this variable
};

struct CompareAction {
  std::string agent;
  std::string variable;
};

using Action = std::variant<Prepare, FriendMeasureAction, SendAction,
                            OutsideMeasureAction, UndoAction, NotebookWriteAction,
                            InferAction, AnnounceAction, CompareAction>;

struct ScriptStep {
  int time = 0;
  std::string actor;
  Action action;
  std::string op_id;
};

struct ExperimentScript {
  std::string name;
  std::vector<RegisterSpec> registers;
  // Product-state initialisation; registers absent here start in basis 0.
  std::map<std::string, std::vector<cplx>> initial;
  std::vector<Agent> agents;
  std::vector<ScriptStep> steps;
  std::string comparison_variable;       // empty when no Compare step exists
  std::vector<std::string> observables;  // variables reported by analysis
};

// Times must be non-decreasing, registers declared, actions well-formed,
// and no physical operation may touch two different agents' labs at once
// (labs exchange systems only through Send).
void validate_script(const ExperimentScript& script);

StateVector initial_state(const ExperimentScript& script);

// Per-agent view circuits: friend measurements appear as their square
// unitaries, followed by a projective memory readout when the agent treats
// that variable as classical; outside measurements appear projectively only
// for agents that treat them classically.
std::map<std::string, AgentViewCircuit> build_views(const ExperimentScript& script);

// The concatenation of every InferAction's steps, in script order.
std::vector<InferStep> inference_schedule(const ExperimentScript& script);

// The three stock experiments ---------------------------------------------

// Friend in a box: one friend measures R (default |+>), nobody intervenes.
ExperimentScript script_wigner(std::vector<cplx> r_init = {});
// Friend in a box + notebook write + measurement undo + final check of R
// against |+>.
ExperimentScript script_deutsch(std::vector<cplx> r_init = {});
// Two labs, entangled by a sent qubit, measured from outside in the ok/fail
// bases, with the full four-agent inference chain.
ExperimentScript script_fr();

// Execution ---------------------------------------------------------------

enum class Verdict { Consistent, Contradiction, Aborted };
std::string verdict_name(Verdict v);

struct TraceEvent {
  int time = 0;
  std::string actor;
  std::string kind;  // prepare, friend-measure, send, outside-measure, undo,
                     // notebook-write, infer, announce, compare
  std::string op_id;
  std::string variable;
  std::string outcome;
  double probability = -1.0;  // conditional sampling probability
  std::vector<std::string> statements;
};

struct ViolationRecord {
  int time = 0;
  std::string op_id;
  std::string reason;
};

struct RunTrace {
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  ObservationLog log;
  std::map<std::string, std::string> values;  // variable -> outcome label
  Verdict verdict = Verdict::Consistent;
  std::optional<Contradiction> contradiction;
  std::vector<StruckRecord> struck;
  std::optional<ViolationRecord> violation;
  std::vector<Agent> final_agents;
  std::vector<std::string> transcript;
  StateVector final_state;
};

RunTrace execute(const ExperimentScript& script, const Policy& policy,
                 std::uint64_t seed);
// Reuses caller-owned views (and their branch memos) across runs.
RunTrace execute(const ExperimentScript& script, const Policy& policy,
                 std::uint64_t seed,
                 const std::map<std::string, AgentViewCircuit>& views);

// Exact analysis ------------------------------------------------------------

struct BranchResult {
  double probability = 0.0;  // product of conditional outcome probabilities
  std::map<std::string, std::string> values;
  Verdict verdict = Verdict::Consistent;
  std::optional<Contradiction> contradiction;
  std::vector<std::string> transcript;
  std::vector<StruckRecord> struck;
  std::optional<ViolationRecord> violation;
};

struct ExactAnalysis {
  std::vector<BranchResult> branches;  // depth-first outcome order
  // Marginal of one observable; branches that never measure it contribute
  // to the pseudo-label "(unmeasured)".
  Distribution marginal(const std::string& variable) const;
  double joint(const std::vector<std::pair<std::string, std::string>>& event) const;
  double contradiction_probability() const;
};

// Enumerates every outcome branch by replaying the script with preset
// choices (no sampling); branch probabilities multiply the conditional
// probabilities along the path and sum to one.
ExactAnalysis exact_analysis(const ExperimentScript& script, const Policy& policy);

}  // namespace friendsim
