#include "friendsim/agents.hpp"

#include <algorithm>
#include <sstream>

namespace friendsim {

void validate_statement(const Statement& s, std::size_t max_nesting) {
  if (s.speaker.empty()) throw InvalidSpec("statement without a speaker");
  if (s.atom.variable.empty()) throw InvalidSpec("statement atom without a variable");
  if (s.depth() > max_nesting)
    throw InvalidSpec("statement nesting depth " + std::to_string(s.depth()) +
                      " exceeds bound " + std::to_string(max_nesting));
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Observation: return "observation";
    case Provenance::Inference: return "inference";
    case Provenance::Adoption: return "adoption";
    case Provenance::AnnouncementReceived: return "announcement-received";
  }
  return "observation";
}

bool Agent::holds(const Statement& s) const {
  for (const auto& e : knowledge)
    if (!e.struck && e.statement.same_claim(s)) return true;
  return false;
}

const Agent& find_agent(const std::vector<Agent>& agents, const std::string& name) {
  for (const auto& a : agents)
    if (a.name == name) return a;
  throw InvalidSpec("no agent named " + name);
}

Agent& find_agent(std::vector<Agent>& agents, const std::string& name) {
  for (auto& a : agents)
    if (a.name == name) return a;
  throw InvalidSpec("no agent named " + name);
}

const KnowledgeEntry& record_observation(Agent& agent, const ObservationLog& log,
                                         const std::string& variable,
                                         const std::string& value, int time) {
  const bool seen = std::any_of(log.begin(), log.end(), [&](const Observation& o) {
    return o.agent == agent.name && o.variable == variable && o.value == value &&
           o.time == time;
  });
  if (!seen)
    throw ProvenanceError("agent " + agent.name + " recording " + variable + "=" +
                          value + " at t=" + std::to_string(time) +
                          " without a matching trace outcome");
  Statement s;
  s.speaker = agent.name;
  s.time = time;
  s.atom = Atom{variable, value, time};
  s.derivation = {agent.name};
  validate_statement(s);
  agent.knowledge.push_back({s, Provenance::Observation, false, -1});
  return agent.knowledge.back();
}

bool receive_announcement(Agent& receiver, const Agent& sender,
                          const Announcement& ann, int delivery_time) {
  // The sender must have held the statement when announcing; a copy struck
  // after the announcement still counts (the announcement itself stands).
  const bool ever_held =
      std::any_of(sender.knowledge.begin(), sender.knowledge.end(),
                  [&](const KnowledgeEntry& e) {
                    return e.statement.same_claim(ann.statement);
                  });
  if (!ever_held)
    throw ProvenanceError("announcement from " + sender.name +
                          " of a statement the sender does not hold");
  if (receiver.name == sender.name) return false;

  Statement s;
  s.speaker = receiver.name;
  s.time = delivery_time;
  s.nested.push_back(sender.name);
  for (const auto& n : ann.statement.nested) s.nested.push_back(n);
  s.atom = ann.statement.atom;
  s.derivation = ann.statement.derivation;
  s.derivation.insert(receiver.name);
  validate_statement(s);
  for (const auto& e : receiver.knowledge)
    if (e.statement.same_claim(s)) return false;
  receiver.knowledge.push_back({s, Provenance::AnnouncementReceived, false, -1});
  return true;
}

std::string render_atom(const Atom& atom, bool include_time) {
  std::string out = atom.variable + "=" + atom.value;
  if (include_time) out += " at t=" + std::to_string(atom.time);
  return out;
}

std::string render_statement_body(const Statement& s,
                                  const std::vector<Agent>& agents,
                                  bool include_time) {
  std::string out;
  for (const auto& n : s.nested) {
    out += find_agent(agents, n).display_name;
    out += " is certain that ";
  }
  out += render_atom(s.atom, include_time);
  return out;
}

std::string render_statement(const Statement& s, const std::vector<Agent>& agents,
                             bool include_time) {
  std::ostringstream os;
  os << "[t=" << s.time << "] " << find_agent(agents, s.speaker).display_name
     << ": \"I am certain that " << render_statement_body(s, agents, include_time)
     << ".\"";
  return os.str();
}

std::string render_entry(const KnowledgeEntry& e, const std::vector<Agent>& agents) {
  return render_statement(e.statement, agents, true);
}

std::string describe_entry(const KnowledgeEntry& e) {
  std::ostringstream os;
  os << "{t=" << e.statement.time << ", " << e.statement.speaker << ", "
     << provenance_name(e.provenance) << ", ";
  for (const auto& n : e.statement.nested) os << "certain(" << n << ", ";
  os << e.statement.atom.variable << "=" << e.statement.atom.value << "@t"
     << e.statement.atom.time;
  for (std::size_t i = 0; i < e.statement.nested.size(); ++i) os << ")";
  os << "}";
  if (e.struck) os << " struck@t" << e.struck_at;
  return os.str();
}

}  // namespace friendsim
