#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "friendsim/errors.hpp"

namespace friendsim {

// Ground-level claim: variable takes `value` at (protocol) time `time`.
struct Atom {
  std::string variable;
  std::string value;
  int time = 0;

  bool operator==(const Atom&) const = default;
};

// "I am certain that [X is certain that ...] variable=value at time t."
// The nesting chain runs outermost to innermost; an empty chain is a direct
// claim. Statements always bottom out in an Atom. `derivation` names every
// agent whose reasoning or memory the statement rests on (used by the
// hadamard-invalidation policy).
struct Statement {
  std::string speaker;
  int time = 0;                      // when stated
  std::vector<std::string> nested;   // agent chain, outermost first
  Atom atom;
  std::set<std::string> derivation;

  std::size_t depth() const { return nested.size(); }
  bool same_claim(const Statement& o) const {
    return nested == o.nested && atom == o.atom;
  }
};

inline constexpr std::size_t kDefaultMaxNesting = 4;
void validate_statement(const Statement& s, std::size_t max_nesting = kDefaultMaxNesting);

enum class Provenance { Observation, Inference, Adoption, AnnouncementReceived };
std::string provenance_name(Provenance p);

struct KnowledgeEntry {
  Statement statement;
  Provenance provenance = Provenance::Observation;
  bool struck = false;
  int struck_at = -1;
};

struct Agent {
  std::string name;           // lowercase id used in transcripts
  std::string display_name;   // used inside rendered sentences
  std::string pronoun = "they";
  std::string memory_register;              // empty for outside agents
  std::vector<std::string> lab_registers;   // empty for outside agents
  // Variables this agent treats as classical in their own view circuit
  // (their cut); always includes their own outcomes.
  std::vector<std::string> classical_variables;
  std::vector<KnowledgeEntry> knowledge;

  bool holds(const Statement& s) const;  // non-struck entry with same claim
};

// Measurement outcomes actually produced by a run; observations must match.
struct Observation {
  std::string agent;
  std::string variable;
  std::string value;
  int time = 0;
};
using ObservationLog = std::vector<Observation>;

struct Announcement {
  std::string from;
  std::string to;  // empty = broadcast to every other agent
  Statement statement;
  int time = 0;
};

// Appends the observation statement (provenance: observation) after checking
// the log actually contains that outcome; returns the appended statement.
const KnowledgeEntry& record_observation(Agent& agent, const ObservationLog& log,
                                         const std::string& variable,
                                         const std::string& value, int time);

// Appends Certain(sender, statement) to the receiver (provenance:
// announcement-received). Sender must hold the statement. Self-delivery and
// exact duplicates are no-ops; returns whether an entry was appended.
bool receive_announcement(Agent& receiver, const Agent& sender,
                          const Announcement& ann, int delivery_time);

// Rendering -----------------------------------------------------------------
// Grammar: [t=<n>] <agent>: "I am certain that <...>". Entry renderings keep
// the atom's time suffix (" at t=<m>"); include_time=false exists for the
// composite forms (chain inferences, contradictions) that omit it.

std::string render_atom(const Atom& atom, bool include_time);
std::string render_statement_body(const Statement& s,
                                  const std::vector<Agent>& agents,
                                  bool include_time);
std::string render_statement(const Statement& s, const std::vector<Agent>& agents,
                             bool include_time);
std::string render_entry(const KnowledgeEntry& e, const std::vector<Agent>& agents);

// Canonical one-line form for traces and replay comparison.
std::string describe_entry(const KnowledgeEntry& e);

const Agent& find_agent(const std::vector<Agent>& agents, const std::string& name);
Agent& find_agent(std::vector<Agent>& agents, const std::string& name);

}  // namespace friendsim
