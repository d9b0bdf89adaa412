#include "friendsim/policies.hpp"

#include <algorithm>

#include "doctest.h"
#include "friendsim/protocols.hpp"

using namespace friendsim;

namespace {

ActionContext outside_measure(const std::string& actor,
                              std::vector<std::string> targets,
                              std::vector<std::string> actor_lab = {}) {
  ActionContext ctx;
  ctx.kind = ActionContext::Kind::OutsideMeasure;
  ctx.actor = actor;
  ctx.targets = std::move(targets);
  ctx.actor_lab = std::move(actor_lab);
  return ctx;
}

FriendMeasurement fr_style_fm(const std::string& memory) {
  FriendMeasurement fm;
  fm.agent = "alice";
  fm.observed = "R";
  fm.memory = memory;
  fm.environment = "Aenv";
  fm.variable = "a";
  fm.outcome_labels = {"saw 0", "saw 1"};
  return fm;
}

const MatrixCell* find_cell(const std::vector<MatrixCell>& cells,
                            const std::string& script, const std::string& policy,
                            const std::string& observable) {
  for (const auto& c : cells)
    if (c.script == script && c.policy == policy && c.observable == observable)
      return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("stock policies carry their switches") {
  CHECK(policy_unitary().cut == CutKind::None);
  CHECK_FALSE(policy_unitary().collapse_on_friend_measure);
  CHECK(policy_collapse().collapse_on_friend_measure);
  CHECK(policy_objective_cut({"A"}).cut == CutKind::Objective);
  CHECK(policy_objective_cut({"A"}).classical_registers ==
        std::set<std::string>{"A"});
  CHECK(policy_subjective_cut().cut == CutKind::Subjective);
  CHECK(policy_invalidation().hadamard_invalidation);
  CHECK_FALSE(policy_invalidation().collapse_on_friend_measure);
}

TEST_CASE("policies resolve by name") {
  CHECK(named_policy("unitary").name == "unitary");
  CHECK(named_policy("collapse").name == "collapse");
  CHECK(named_policy("objective-cut", {"A"}).classical_registers.count("A") == 1);
  CHECK(named_policy("subjective-cut").cut == CutKind::Subjective);
  CHECK(named_policy("invalidation").hadamard_invalidation);
  CHECK_THROWS_AS(named_policy("everett"), InvalidSpec);
}

TEST_CASE("an objective cut forbids non-classical measurements of classical registers") {
  const Policy policy = policy_objective_cut({"R", "A", "Aenv"});

  Legality out = legal(policy, outside_measure("ursula", {"R", "A", "Aenv"}));
  CHECK_FALSE(out.allowed);
  CHECK(out.reason.find("non-classical basis") != std::string::npos);

  // registers outside the classical set stay measurable
  CHECK(legal(policy, outside_measure("ursula", {"S", "B"})).allowed);

  // unitary actions and friend measurements remain legal
  ActionContext unitary;
  unitary.kind = ActionContext::Kind::Unitary;
  unitary.targets = {"R"};
  CHECK(legal(policy, unitary).allowed);
  ActionContext friend_measure;
  friend_measure.kind = ActionContext::Kind::FriendMeasure;
  friend_measure.targets = {"R", "A", "Aenv"};
  CHECK(legal(policy, friend_measure).allowed);
}

TEST_CASE("a subjective cut only shields the actor's own lab") {
  const Policy policy = policy_subjective_cut();
  Legality self = legal(policy, outside_measure("alice", {"R", "A"}, {"R", "A", "Aenv"}));
  CHECK_FALSE(self.allowed);
  CHECK(self.reason.find("own lab") != std::string::npos);
  CHECK(legal(policy, outside_measure("ursula", {"R", "A"}, {})).allowed);
}

TEST_CASE("the permissive policies allow every action") {
  for (const Policy& policy : {policy_unitary(), policy_collapse(), policy_invalidation()}) {
    CHECK(legal(policy, outside_measure("alice", {"R"}, {"R", "A"})).allowed);
    ActionContext classical;
    classical.kind = ActionContext::Kind::Classical;
    CHECK(legal(policy, classical).allowed);
  }
}

TEST_CASE("collapse-on-measure follows the policy and the cut") {
  const FriendMeasurement fm = fr_style_fm("A");
  CHECK_FALSE(collapses_friend_measure(policy_unitary(), fm));
  CHECK(collapses_friend_measure(policy_collapse(), fm));
  CHECK(collapses_friend_measure(policy_objective_cut({"A"}), fm));
  CHECK_FALSE(collapses_friend_measure(policy_objective_cut({"B"}), fm));
  CHECK_FALSE(collapses_friend_measure(policy_subjective_cut(), fm));
}

TEST_CASE("apply_collapse projects only when the policy says so") {
  ExperimentScript script = script_wigner();
  const FriendMeasureAction* action = nullptr;
  for (const auto& step : script.steps)
    if (const auto* f = std::get_if<FriendMeasureAction>(&step.action)) action = f;
  REQUIRE(action != nullptr);
  const FriendMeasurement* fm = &action->fm;

  StateVector measured = apply(initial_state(script), action->unitary);

  SplitMix64 rng(5);
  SampleResult keep = apply_collapse(policy_unitary(), measured, *fm,
                                     script.registers, rng);
  CHECK(keep.probability == doctest::Approx(1.0));
  CHECK(std::norm(inner_product(measured, keep.post)) ==
        doctest::Approx(1.0).epsilon(1e-10));

  SampleResult projected = apply_collapse(policy_collapse(), measured, *fm,
                                          script.registers, rng);
  CHECK(projected.probability == doctest::Approx(0.5).epsilon(1e-10));
  // the post state is one definite lab branch, orthogonal to the other
  CHECK(std::abs(projected.post.norm() - 1.0) < kTolAlgebra);
  CHECK(std::norm(inner_product(measured, projected.post)) ==
        doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("hadamard invalidation strikes tainted derivations once") {
  std::vector<Agent> agents = script_fr().agents;
  Agent& bob = find_agent(agents, "bob");

  Statement own;
  own.speaker = "bob";
  own.time = 2;
  own.atom = Atom{"b", "1", 2};
  own.derivation = {"bob"};
  bob.knowledge.push_back({own, Provenance::Observation, false, -1});

  Statement chained;
  chained.speaker = "bob";
  chained.time = 2;
  chained.atom = Atom{"w", "fail", 4};
  chained.derivation = {"alice", "bob"};
  bob.knowledge.push_back({chained, Provenance::Adoption, false, -1});

  const std::vector<HadamardEvent> events = {{"alice", 3}};

  // the flag gates everything
  auto untouched = invalidate_on_hadamarding(policy_unitary(), agents, events, 3);
  CHECK(untouched.empty());
  CHECK_FALSE(bob.knowledge[1].struck);

  // an event in the future does not strike yet
  auto early = invalidate_on_hadamarding(policy_invalidation(), agents, events, 2);
  CHECK(early.empty());

  auto struck = invalidate_on_hadamarding(policy_invalidation(), agents, events, 3);
  REQUIRE(struck.size() == 1);
  CHECK(struck[0].agent == "bob");
  CHECK(struck[0].time == 3);
  // the record keeps the entry's pre-strike canonical form
  CHECK(struck[0].description == "{t=2, bob, adoption, w=fail@t4}");
  CHECK(bob.knowledge[1].struck);
  CHECK(bob.knowledge[1].struck_at == 3);
  CHECK_FALSE(bob.knowledge[0].struck);

  // striking is idempotent
  CHECK(invalidate_on_hadamarding(policy_invalidation(), agents, events, 4).empty());
}

TEST_CASE("the prediction matrix separates the policies per observable") {
  const ExperimentScript wigner = script_wigner();
  const ExperimentScript deutsch = script_deutsch();
  const ExperimentScript fr = script_fr();
  const std::vector<Policy> policies = {
      policy_unitary(), policy_collapse(),
      policy_objective_cut({"R", "A", "Aenv", "S", "B", "Benv"}),
      policy_subjective_cut(), policy_invalidation()};
  const auto cells = prediction_matrix({&wigner, &deutsch, &fr}, policies);

  // every script/policy/observable combination is present
  CHECK(cells.size() == 5 * (1 + 2 + 4));

  const MatrixCell* cell = find_cell(cells, "deutsch", "unitary", "p");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "plus:1");

  cell = find_cell(cells, "deutsch", "collapse", "p");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "minus:0.5 plus:0.5");

  cell = find_cell(cells, "deutsch", "objective-cut", "p");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "disallowed");

  cell = find_cell(cells, "deutsch", "subjective-cut", "p");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "plus:1");

  cell = find_cell(cells, "fr", "unitary", "w");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "fail:0.833333 ok:0.166667");

  cell = find_cell(cells, "fr", "collapse", "u");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "fail:0.5 ok:0.5");

  cell = find_cell(cells, "fr", "objective-cut", "u");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "disallowed");

  cell = find_cell(cells, "fr", "objective-cut", "a");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "0:0.333333 1:0.666667");

  cell = find_cell(cells, "wigner", "invalidation", "a");
  REQUIRE(cell != nullptr);
  CHECK(cell->value == "0:0.5 1:0.5");

  const std::string rendered = render_prediction_matrix(cells);
  CHECK(rendered.find("experiment") != std::string::npos);
  CHECK(rendered.find("disallowed") != std::string::npos);
}
