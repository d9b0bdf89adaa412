#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "friendsim/agents.hpp"
#include "friendsim/circuit.hpp"
#include "friendsim/hilbert.hpp"

namespace friendsim {

// Where the classical/quantum boundary sits.
//   None:       everything evolves unitarily until someone measures it.
//   Objective:  a fixed register set is classical for everyone; measuring
//               any of those registers in a non-classical basis is
//               ill-defined, and a friend measurement whose memory is
//               classical collapses on the spot.
//   Subjective: each agent draws the boundary around their own lab; an agent
//               may not measure their own lab from outside, everyone else
//               may.
enum class CutKind { None, Objective, Subjective };

struct Policy {
  std::string name;
  CutKind cut = CutKind::None;
  std::set<std::string> classical_registers;  // objective cut only
  bool collapse_on_friend_measure = false;
  bool hadamard_invalidation = false;
};

// Stock policies.
Policy policy_unitary();
Policy policy_collapse();
Policy policy_objective_cut(std::set<std::string> classical_registers);
Policy policy_subjective_cut();
Policy policy_invalidation();  // unitary + hadamard_invalidation

Policy named_policy(const std::string& name,
                    std::set<std::string> classical_registers = {});

// Legality ------------------------------------------------------------

struct ActionContext {
  enum class Kind { Unitary, FriendMeasure, OutsideMeasure, Classical };
  Kind kind = Kind::Classical;
  std::string actor;
  std::vector<std::string> targets;    // registers the action touches
  std::vector<std::string> actor_lab;  // actor's own lab registers
};

struct Legality {
  bool allowed = true;
  std::string reason;
};

Legality legal(const Policy& policy, const ActionContext& ctx);

// True when the friend measurement must collapse under this policy (either
// phenomenological collapse, or an objective cut that makes the memory
// register classical).
bool collapses_friend_measure(const Policy& policy, const FriendMeasurement& fm);

// Sample one lab branch by the Born rule and project onto it (trajectory
// representation of the post-measurement mixture).
SampleResult apply_collapse(const Policy& policy, const StateVector& state,
                            const FriendMeasurement& fm,
                            const std::vector<RegisterSpec>& regs, SplitMix64& rng);

// Hadamard invalidation -------------------------------------------------

// An outside measurement disturbed this agent's lab at `time`.
struct HadamardEvent {
  std::string agent;
  int time = 0;
};

struct StruckRecord {
  std::string agent;        // whose knowledge base
  int time = 0;             // when struck
  std::string description;  // canonical entry form
};

// Strikes every non-struck entry whose derivation names an agent with a
// hadamard event at or before `now`; no-op unless the policy enables it.
std::vector<StruckRecord> invalidate_on_hadamarding(
    const Policy& policy, std::vector<Agent>& agents,
    const std::vector<HadamardEvent>& events, int now);

// Prediction matrix ------------------------------------------------------

struct ExperimentScript;

// One (script, policy, observable) cell: the exact outcome distribution
// rendered as "label:p label:p", or "disallowed" when the policy aborts the
// run before the observable is measured.
struct MatrixCell {
  std::string script;
  std::string policy;
  std::string observable;
  std::string value;
};

std::vector<MatrixCell> prediction_matrix(
    const std::vector<const ExperimentScript*>& scripts,
    const std::vector<Policy>& policies);

std::string render_prediction_matrix(const std::vector<MatrixCell>& cells);

}  // namespace friendsim
