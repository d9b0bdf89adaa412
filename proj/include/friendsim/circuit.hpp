#pragma once

#include <map>
#include <string>
#include <vector>

#include "friendsim/hilbert.hpp"

namespace friendsim {

// One agent measuring `observed` inside their lab: the observed register is
// copied into the memory register (ready state -> per-outcome label) while
// the environment picks up a matching imprint. All bindings are by basis
// label so scripts stay readable.
struct FriendMeasurement {
  std::string agent;
  std::string observed;
  std::string memory;
  std::string environment;
  std::string variable;                       // outcome variable, e.g. "a"
  std::string ready_label = "I am ready.";
  std::vector<std::string> outcome_labels;    // memory label per observed index
  std::size_t env_initial_index = 0;
  // Overlap <env_0|env_i> for i > 0; 0 keeps environment branches orthogonal.
  double env_overlap = 0.0;

  std::vector<std::string> lab() const { return {observed, memory, environment}; }
};

// Environment branch state for outcome i, over the environment register.
std::vector<cplx> environment_branch(const FriendMeasurement& fm,
                                     const RegisterSpec& env, std::size_t i);

// |lab_i> over (observed, memory, environment).
StateVector lab_state(const FriendMeasurement& fm,
                      const std::vector<RegisterSpec>& regs, std::size_t i);
// Ready product state |i> (x) |ready> (x) |env>.
StateVector ready_state(const FriendMeasurement& fm,
                        const std::vector<RegisterSpec>& regs, std::size_t i);

// Square unitary on (observed, memory, environment) extending the isometry
// |i>|ready>|env> -> |lab_i>. Completion is deterministic (Gram-Schmidt over
// the computational basis).
LinearOp build_friend_measurement(const FriendMeasurement& fm,
                                  const std::vector<RegisterSpec>& regs);
// Exact inverse: maps |lab_i> back to |i>|ready>|env>.
LinearOp build_undo(const FriendMeasurement& fm,
                    const std::vector<RegisterSpec>& regs);

// Two-outcome measurement {ok, fail} on the lab registers, completed by a
// catch-all "other" outcome:
//   |ok>   = sqrt(1/2) (|lab_0> - |lab_1>)
//   |fail> = sqrt(1/2) (|lab_0> + |lab_1>)
MeasurementSpec build_ok_fail(const FriendMeasurement& fm,
                              const std::vector<RegisterSpec>& regs);

// Projective readout of the friend's memory register: outcome i is the
// memory state for observed index i, labelled by the observed register's
// basis label; the ready state falls into the catch-all.
MeasurementSpec memory_readout(const FriendMeasurement& fm,
                               const std::vector<RegisterSpec>& regs);

// Unitary on (memory, notebook) writing the outcome-independent note: the
// notebook flips empty -> definitive whenever the memory holds any outcome
// label, and stays put on the ready state. With `record_outcome` the
// notebook instead receives one distinct label per outcome (the variant that
// spoils interference).
LinearOp build_notebook_write(const FriendMeasurement& fm,
                              const RegisterSpec& notebook,
                              const std::vector<RegisterSpec>& regs,
                              bool record_outcome = false);

inline constexpr const char* kNotebookEmpty = "empty";
inline constexpr const char* kNotebookDefinitive = "I observed a definitive outcome.";

// The measurement-undo identity circuits on a qubit-encoded lab L plus a
// record qubit: `direct` conjugates a copy by Hadamards on L, `reversed`
// conjugates an inverted copy by Hadamards on the record. Their global
// unitaries are equal.
struct HadamardingCircuits {
  std::vector<LinearOp> direct;    // H(L), CNOT L->rec, H(L)
  std::vector<LinearOp> reversed;  // H(rec), CNOT rec->L, H(rec)
};
HadamardingCircuits hadamarding_decomposition(const MeasurementSpec& m,
                                              const std::string& record_name);

// Circuit views -----------------------------------------------------------

enum class WireKind { Quantum, Classical };

struct ViewGate {
  std::string op_id;                // shared across agent views of one experiment
  std::vector<std::string> registers;
  bool unitary = true;
};

struct CircuitView {
  std::string agent;
  std::vector<std::string> wire_order;          // registers, top to bottom
  std::map<std::string, WireKind> wires;
  std::vector<ViewGate> gates;
};

// Fixed-width deterministic text rendering; format documented in
// docs/circuit-diagrams.md.
std::string render_view(const CircuitView& view);

// Gates appearing in both views (same op_id) must compose to identical
// global unitaries in both views' orders. `ops` maps op_id to the actual
// operator; measurement gates are compared by target-set equality.
bool views_consistent(const CircuitView& a, const CircuitView& b,
                      const std::map<std::string, LinearOp>& ops,
                      const std::vector<RegisterSpec>& regs);

}  // namespace friendsim
