#include "friendsim/agents.hpp"

#include "doctest.h"

using namespace friendsim;

namespace {

std::vector<Agent> cast() {
  Agent alice{"alice", "Alice", "she", "A", {"R", "A"}, {"a"}, {}};
  Agent bob{"bob", "Bob", "he", "B", {"B"}, {"a", "b"}, {}};
  Agent wigner{"wigner", "Wigner", "he", "", {}, {}, {}};
  return {alice, bob, wigner};
}

Statement direct_claim(const std::string& speaker, const std::string& variable,
                       const std::string& value, int atom_time, int said_at) {
  Statement s;
  s.speaker = speaker;
  s.time = said_at;
  s.atom = Atom{variable, value, atom_time};
  s.derivation = {speaker};
  return s;
}

}  // namespace

TEST_CASE("statements validate speaker, atom, and nesting depth") {
  Statement s = direct_claim("alice", "a", "1", 1, 1);
  CHECK_NOTHROW(validate_statement(s));

  Statement anonymous = s;
  anonymous.speaker.clear();
  CHECK_THROWS_AS(validate_statement(anonymous), InvalidSpec);

  Statement hollow = s;
  hollow.atom.variable.clear();
  CHECK_THROWS_AS(validate_statement(hollow), InvalidSpec);

  Statement deep = s;
  deep.nested = {"b", "c", "d", "e"};
  CHECK_NOTHROW(validate_statement(deep));
  deep.nested.push_back("f");
  CHECK_THROWS_AS(validate_statement(deep), InvalidSpec);
  CHECK_NOTHROW(validate_statement(deep, 5));
}

TEST_CASE("recorded observations must match the trace log") {
  auto agents = cast();
  Agent& alice = find_agent(agents, "alice");
  ObservationLog log = {{"alice", "a", "1", 1}};

  const KnowledgeEntry& e = record_observation(alice, log, "a", "1", 1);
  CHECK(e.provenance == Provenance::Observation);
  CHECK(e.statement.nested.empty());
  CHECK(e.statement.derivation == std::set<std::string>{"alice"});
  CHECK(alice.holds(e.statement));

  CHECK_THROWS_AS(record_observation(alice, log, "a", "0", 1), ProvenanceError);
  CHECK_THROWS_AS(record_observation(alice, log, "a", "1", 2), ProvenanceError);
  Agent& bob = find_agent(agents, "bob");
  CHECK_THROWS_AS(record_observation(bob, log, "a", "1", 1), ProvenanceError);
}

TEST_CASE("holds ignores struck entries") {
  auto agents = cast();
  Agent& alice = find_agent(agents, "alice");
  ObservationLog log = {{"alice", "a", "1", 1}};
  record_observation(alice, log, "a", "1", 1);
  Statement claim = direct_claim("anyone", "a", "1", 1, 9);
  CHECK(alice.holds(claim));
  alice.knowledge[0].struck = true;
  alice.knowledge[0].struck_at = 3;
  CHECK_FALSE(alice.holds(claim));
}

TEST_CASE("announcements wrap the statement in the sender's certainty") {
  auto agents = cast();
  Agent& alice = find_agent(agents, "alice");
  Agent& bob = find_agent(agents, "bob");
  ObservationLog log = {{"alice", "a", "1", 1}};
  record_observation(alice, log, "a", "1", 1);

  Announcement ann{"alice", "bob", alice.knowledge[0].statement, 2};
  REQUIRE(receive_announcement(bob, alice, ann, 2));
  REQUIRE(bob.knowledge.size() == 1);
  const Statement& got = bob.knowledge[0].statement;
  CHECK(got.speaker == "bob");
  CHECK(got.nested == std::vector<std::string>{"alice"});
  CHECK(got.atom == Atom{"a", "1", 1});
  CHECK(bob.knowledge[0].provenance == Provenance::AnnouncementReceived);
  CHECK(got.derivation.count("alice") == 1);
  CHECK(got.derivation.count("bob") == 1);

  // duplicates and self-delivery are quiet no-ops
  CHECK_FALSE(receive_announcement(bob, alice, ann, 3));
  CHECK_FALSE(receive_announcement(alice, alice, ann, 3));
}

TEST_CASE("announcing a statement the sender never held is an error") {
  auto agents = cast();
  Agent& alice = find_agent(agents, "alice");
  Agent& bob = find_agent(agents, "bob");
  Announcement ann{"alice", "bob", direct_claim("alice", "a", "1", 1, 1), 2};
  CHECK_THROWS_AS(receive_announcement(bob, alice, ann, 2), ProvenanceError);
}

TEST_CASE("a struck copy does not retract an announcement already made") {
  auto agents = cast();
  Agent& alice = find_agent(agents, "alice");
  Agent& bob = find_agent(agents, "bob");
  ObservationLog log = {{"alice", "a", "1", 1}};
  record_observation(alice, log, "a", "1", 1);
  alice.knowledge[0].struck = true;
  alice.knowledge[0].struck_at = 2;

  Announcement ann{"alice", "bob", alice.knowledge[0].statement, 2};
  CHECK(receive_announcement(bob, alice, ann, 3));
}

TEST_CASE("rendering follows the certainty grammar") {
  auto agents = cast();
  CHECK(render_atom(Atom{"a", "1", 1}, true) == "a=1 at t=1");
  CHECK(render_atom(Atom{"a", "1", 1}, false) == "a=1");

  Statement s = direct_claim("alice", "a", "1", 1, 1);
  CHECK(render_statement(s, agents, true) ==
        "[t=1] Alice: \"I am certain that a=1 at t=1.\"");

  Statement nested = direct_claim("wigner", "w", "fail", 4, 4);
  nested.nested = {"alice"};
  CHECK(render_statement(nested, agents, true) ==
        "[t=4] Wigner: \"I am certain that Alice is certain that w=fail at t=4.\"");
  CHECK(render_statement_body(nested, agents, false) ==
        "Alice is certain that w=fail");

  KnowledgeEntry e{s, Provenance::Observation, false, -1};
  CHECK(render_entry(e, agents) == "[t=1] Alice: \"I am certain that a=1 at t=1.\"");
}

TEST_CASE("describe_entry gives the canonical one-line form") {
  Statement s = direct_claim("alice", "a", "1", 1, 1);
  KnowledgeEntry e{s, Provenance::Observation, false, -1};
  CHECK(describe_entry(e) == "{t=1, alice, observation, a=1@t1}");

  Statement nested = direct_claim("bob", "w", "fail", 4, 2);
  nested.nested = {"alice"};
  KnowledgeEntry n{nested, Provenance::Inference, false, -1};
  CHECK(describe_entry(n) == "{t=2, bob, inference, certain(alice, w=fail@t4)}");

  n.struck = true;
  n.struck_at = 4;
  CHECK(describe_entry(n) ==
        "{t=2, bob, inference, certain(alice, w=fail@t4)} struck@t4");
}

TEST_CASE("provenance names are stable") {
  CHECK(provenance_name(Provenance::Observation) == "observation");
  CHECK(provenance_name(Provenance::Inference) == "inference");
  CHECK(provenance_name(Provenance::Adoption) == "adoption");
  CHECK(provenance_name(Provenance::AnnouncementReceived) == "announcement-received");
}

TEST_CASE("find_agent resolves names and rejects strangers") {
  auto agents = cast();
  CHECK(find_agent(agents, "bob").display_name == "Bob");
  CHECK_THROWS_AS(find_agent(agents, "eve"), InvalidSpec);
}
