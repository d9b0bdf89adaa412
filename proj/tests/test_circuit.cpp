#include "friendsim/circuit.hpp"

#include <cmath>

#include "doctest.h"
#include "friendsim/hilbert.hpp"

using namespace friendsim;

namespace {

FriendMeasurement test_fm(double env_overlap = 0.0) {
  FriendMeasurement fm;
  fm.agent = "alice";
  fm.observed = "R";
  fm.memory = "A";
  fm.environment = "Aenv";
  fm.variable = "a";
  fm.outcome_labels = {"I observed a=0.", "I observed a=1."};
  fm.env_overlap = env_overlap;
  return fm;
}

std::vector<RegisterSpec> lab_registers() {
  RegisterSpec r{"R", 2, RegisterRole::System, {}};
  RegisterSpec a{"A", 3, RegisterRole::Memory,
                 {"I am ready.", "I observed a=0.", "I observed a=1."}};
  RegisterSpec env{"Aenv", 2, RegisterRole::Environment, {}};
  return {r, a, env};
}

StateVector plus_ready(const FriendMeasurement& fm,
                       const std::vector<RegisterSpec>& regs) {
  const double h = 1.0 / std::sqrt(2.0);
  return h * ready_state(fm, regs, 0) + h * ready_state(fm, regs, 1);
}

Matrix compose(const std::vector<LinearOp>& ops,
               const std::vector<RegisterSpec>& regs) {
  std::size_t dim = 1;
  for (const auto& r : regs) dim *= r.dimension;
  Matrix total = Matrix::identity(dim);
  for (const auto& op : ops) total = embed(op, regs).mul(total);
  return total;
}

}  // namespace

TEST_CASE("the friend measurement is a square unitary copying into memory and environment") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  LinearOp op = build_friend_measurement(fm, regs);
  REQUIRE_FALSE(op.is_isometry_op());
  CHECK(op.matrix.is_unitary());

  for (std::size_t i = 0; i < 2; ++i) {
    StateVector in = ready_state(fm, regs, i);
    StateVector expect = lab_state(fm, regs, i);
    StateVector out = apply(in, op);
    CHECK(std::abs(inner_product(expect, out) - cplx(1.0)) < kTolAlgebra);
  }
}

TEST_CASE("measuring a superposed register entangles the whole lab") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  LinearOp op = build_friend_measurement(fm, regs);
  StateVector out = apply(plus_ready(fm, regs), op);
  const double h = 1.0 / std::sqrt(2.0);
  StateVector expect = h * lab_state(fm, regs, 0) + h * lab_state(fm, regs, 1);
  CHECK(std::abs(inner_product(expect, out) - cplx(1.0)) < kTolAlgebra);
  // memory alone carries no interference: reduced state is diagonal
  Matrix rho = reduced_density(out, "A");
  CHECK(std::abs(rho.at(1, 2)) < kTolAlgebra);
  CHECK(rho.at(1, 1).real() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("undo inverts the friend measurement exactly") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  LinearOp forward = build_friend_measurement(fm, regs);
  LinearOp undo = build_undo(fm, regs);
  Matrix round_trip = compose({forward, undo}, regs);
  CHECK(round_trip.approx_equal(Matrix::identity(round_trip.rows), kTolAlgebra));
}

TEST_CASE("undo returns the observed register to its pre-measurement state") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  StateVector in = plus_ready(fm, regs);
  StateVector measured = apply(in, build_friend_measurement(fm, regs));
  StateVector undone = apply(measured, build_undo(fm, regs));
  const double fidelity = std::norm(inner_product(in, undone));
  CHECK(fidelity == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("undo round-trips random observed states") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  LinearOp forward = build_friend_measurement(fm, regs);
  LinearOp undo = build_undo(fm, regs);
  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    cplx c0(rng.next_double() * 2 - 1, rng.next_double() * 2 - 1);
    cplx c1(rng.next_double() * 2 - 1, rng.next_double() * 2 - 1);
    const double n = std::sqrt(std::norm(c0) + std::norm(c1));
    StateVector in = (c0 / n) * ready_state(fm, regs, 0) +
                     (c1 / n) * ready_state(fm, regs, 1);
    StateVector out = apply(apply(in, forward), undo);
    CHECK(std::norm(inner_product(in, out)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("environment branches honour the requested overlap") {
  const auto regs = lab_registers();
  const RegisterSpec& env = regs[2];

  const FriendMeasurement orthogonal = test_fm(0.0);
  auto e0 = environment_branch(orthogonal, env, 0);
  auto e1 = environment_branch(orthogonal, env, 1);
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < e0.size(); ++i) overlap += std::conj(e0[i]) * e1[i];
  CHECK(std::abs(overlap) < kTolAlgebra);

  const FriendMeasurement leaky = test_fm(0.5);
  e0 = environment_branch(leaky, env, 0);
  e1 = environment_branch(leaky, env, 1);
  overlap = 0.0;
  for (std::size_t i = 0; i < e0.size(); ++i) overlap += std::conj(e0[i]) * e1[i];
  CHECK(std::abs(overlap - cplx(0.5)) < kTolAlgebra);
  // the copy map stays an isometry, so the extension stays unitary
  CHECK(build_friend_measurement(leaky, regs).matrix.is_unitary());
}

TEST_CASE("the ok/fail basis is the interference observable on the lab") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  MeasurementSpec m = build_ok_fail(fm, regs);
  REQUIRE(m.outcome_labels.size() == 2);
  CHECK(m.outcome_labels[0] == "ok");
  CHECK(m.outcome_labels[1] == "fail");
  CHECK(m.complete_with_other);
  CHECK_NOTHROW(m.validate());

  // a single lab branch splits evenly
  Distribution d = outcome_distribution(lab_state(fm, regs, 0), m);
  CHECK(prob_of(d, "ok") == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(prob_of(d, "fail") == doctest::Approx(0.5).epsilon(1e-10));

  // the measured |+> lab is pure fail
  LinearOp forward = build_friend_measurement(fm, regs);
  StateVector measured = apply(plus_ready(fm, regs), forward);
  d = outcome_distribution(measured, m);
  CHECK(prob_of(d, "fail") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(prob_of(d, "ok") == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("memory readout labels outcomes by the observed register") {
  const FriendMeasurement fm = test_fm();
  const auto regs = lab_registers();
  MeasurementSpec m = memory_readout(fm, regs);
  REQUIRE(m.outcome_labels.size() == 2);
  CHECK(m.outcome_labels[0] == "0");
  CHECK(m.outcome_labels[1] == "1");
  CHECK(m.complete_with_other);

  StateVector measured =
      apply(plus_ready(fm, regs), build_friend_measurement(fm, regs));
  Distribution d = outcome_distribution(measured, m);
  CHECK(prob_of(d, "0") == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(prob_of(d, "1") == doctest::Approx(0.5).epsilon(1e-10));

  // before the measurement everything sits in the catch-all ready branch
  d = outcome_distribution(plus_ready(fm, regs), m);
  CHECK(prob_of(d, m.other_label) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("the outcome-independent notebook write leaves the lab untouched") {
  const FriendMeasurement fm = test_fm();
  auto regs = lab_registers();
  RegisterSpec notebook{"N", 2, RegisterRole::Notebook,
                        {kNotebookEmpty, kNotebookDefinitive}};
  regs.push_back(notebook);

  LinearOp forward = build_friend_measurement(fm, regs);
  LinearOp write = build_notebook_write(fm, notebook, regs);
  const double h = 1.0 / std::sqrt(2.0);
  StateVector lab = h * lab_state(fm, regs, 0) + h * lab_state(fm, regs, 1);
  StateVector expect = tensor({lab, StateVector::ket(notebook, 1)});
  StateVector start = tensor({plus_ready(fm, regs), StateVector::ket(notebook, 0)});
  StateVector out = apply(apply(start, forward), write);
  // product state: notebook says definitive, lab superposition intact
  CHECK(std::norm(inner_product(expect, out)) == doctest::Approx(1.0).epsilon(1e-10));

  // the ready state leaves the notebook empty
  StateVector idle = apply(start, write);
  CHECK(std::norm(inner_product(start, idle)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("recording the outcome in the notebook spoils the product form") {
  const FriendMeasurement fm = test_fm();
  auto regs = lab_registers();
  // per-outcome notes use the measurement's own outcome labels
  RegisterSpec notebook{"N", 3, RegisterRole::Notebook,
                        {kNotebookEmpty, "I observed a=0.", "I observed a=1."}};
  regs.push_back(notebook);

  LinearOp forward = build_friend_measurement(fm, regs);
  LinearOp write = build_notebook_write(fm, notebook, regs, true);
  StateVector start = tensor({plus_ready(fm, regs), StateVector::ket(notebook, 0)});
  StateVector out = apply(apply(start, forward), write);
  // notebook is now correlated with the outcome: maximally mixed
  Matrix rho = reduced_density(out, "N");
  CHECK(rho.at(1, 1).real() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(rho.at(2, 2).real() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(rho.at(1, 2)) < kTolAlgebra);
}

TEST_CASE("both measure-then-undo decompositions share one global unitary") {
  RegisterSpec lab{"L", 2, RegisterRole::System, {}};
  RegisterSpec rec{"rec", 2, RegisterRole::Record, {}};
  const std::vector<RegisterSpec> regs = {lab, rec};
  HadamardingCircuits hc =
      hadamarding_decomposition(computational_measurement(lab), "rec");
  REQUIRE(hc.direct.size() == 3);
  REQUIRE(hc.reversed.size() == 3);
  Matrix direct = compose(hc.direct, regs);
  Matrix reversed = compose(hc.reversed, regs);
  CHECK(direct.approx_equal(reversed, kTolAlgebra));
  // and the combination is not the identity: it really copies
  CHECK_FALSE(direct.approx_equal(Matrix::identity(direct.rows), kTolAlgebra));
}

TEST_CASE("render_view draws classical wires and measurement boxes distinctly") {
  CircuitView view;
  view.agent = "alice";
  view.wire_order = {"R", "A"};
  view.wires = {{"R", WireKind::Quantum}, {"A", WireKind::Classical}};
  view.gates = {ViewGate{"U1", {"R", "A"}, true}, ViewGate{"M1", {"A"}, false}};
  CHECK(render_view(view) ==
        "view: alice\n"
        "R --[U1]--------\n"
        "A ==[U1]==(M1)==\n");
}

TEST_CASE("views agree when shared gates compose identically") {
  RegisterSpec r{"R", 2, RegisterRole::System, {}};
  const std::vector<RegisterSpec> regs = {r};
  const double h = 1.0 / std::sqrt(2.0);
  Matrix hm(2, 2);
  hm.at(0, 0) = h;
  hm.at(0, 1) = h;
  hm.at(1, 0) = h;
  hm.at(1, 1) = -h;
  Matrix xm(2, 2);
  xm.at(0, 1) = 1.0;
  xm.at(1, 0) = 1.0;
  std::map<std::string, LinearOp> ops;
  ops["H"] = make_unitary({"R"}, hm);
  ops["X"] = make_unitary({"R"}, xm);

  CircuitView a{"alice", {"R"}, {{"R", WireKind::Quantum}}, {}};
  CircuitView b{"bob", {"R"}, {{"R", WireKind::Quantum}}, {}};
  a.gates = {ViewGate{"H", {"R"}, true}, ViewGate{"X", {"R"}, true}};
  b.gates = a.gates;
  CHECK(views_consistent(a, b, ops, regs));

  // same shared gates in the opposite order do not commute
  b.gates = {ViewGate{"X", {"R"}, true}, ViewGate{"H", {"R"}, true}};
  CHECK_FALSE(views_consistent(a, b, ops, regs));

  // a gate only one side has is ignored
  b.gates = {ViewGate{"H", {"R"}, true}};
  CHECK(views_consistent(a, b, ops, regs));

  // measurement boxes must sit on the same registers
  RegisterSpec s{"S", 2, RegisterRole::System, {}};
  const std::vector<RegisterSpec> two = {r, s};
  CircuitView ma{"alice", {"R", "S"}, {}, {ViewGate{"M", {"R"}, false}}};
  CircuitView mb{"bob", {"R", "S"}, {}, {ViewGate{"M", {"S"}, false}}};
  CHECK_FALSE(views_consistent(ma, mb, ops, two));
  mb.gates = ma.gates;
  CHECK(views_consistent(ma, mb, ops, two));
}

TEST_CASE("views referencing an unknown shared op are rejected") {
  RegisterSpec r{"R", 2, RegisterRole::System, {}};
  CircuitView a{"alice", {"R"}, {}, {ViewGate{"GHOST", {"R"}, true}}};
  CircuitView b = a;
  b.agent = "bob";
  CHECK_THROWS_AS(views_consistent(a, b, {}, {r}), InvalidSpec);
}
