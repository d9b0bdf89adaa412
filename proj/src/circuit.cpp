#include "friendsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace friendsim {

namespace {

const RegisterSpec& find_reg(const std::vector<RegisterSpec>& regs,
                             const std::string& name) {
  for (const auto& r : regs)
    if (r.name == name) return r;
  throw ShapeError("no register named " + name);
}

void check_bindings(const FriendMeasurement& fm, const std::vector<RegisterSpec>& regs) {
  const auto& obs = find_reg(regs, fm.observed);
  const auto& mem = find_reg(regs, fm.memory);
  const auto& env = find_reg(regs, fm.environment);
  if (fm.outcome_labels.size() != obs.dimension)
    throw InvalidSpec("friend measurement needs one memory label per observed index");
  mem.index_of_label(fm.ready_label);
  for (const auto& l : fm.outcome_labels) mem.index_of_label(l);
  if (env.dimension < obs.dimension)
    throw ShapeError("environment register " + env.name +
                     " too small for " + std::to_string(obs.dimension) + " branches");
  if (fm.env_initial_index >= env.dimension)
    throw ShapeError("environment initial index out of range");
  if (fm.env_overlap < 0.0 || fm.env_overlap >= 1.0)
    throw InvalidSpec("environment overlap must lie in [0,1)");
}

}  // namespace

std::vector<cplx> environment_branch(const FriendMeasurement& fm,
                                     const RegisterSpec& env, std::size_t i) {
  std::vector<cplx> v(env.dimension);
  if (i == 0 || fm.env_overlap == 0.0) {
    v[i] = 1.0;
  } else {
    v[0] = fm.env_overlap;
    v[i] = std::sqrt(1.0 - fm.env_overlap * fm.env_overlap);
  }
  return v;
}

StateVector lab_state(const FriendMeasurement& fm,
                      const std::vector<RegisterSpec>& regs, std::size_t i) {
  check_bindings(fm, regs);
  const auto& obs = find_reg(regs, fm.observed);
  const auto& mem = find_reg(regs, fm.memory);
  const auto& env = find_reg(regs, fm.environment);
  return tensor({StateVector::ket(obs, i),
                 StateVector::ket(mem, mem.index_of_label(fm.outcome_labels[i])),
                 StateVector::ket(env, environment_branch(fm, env, i))});
}

StateVector ready_state(const FriendMeasurement& fm,
                        const std::vector<RegisterSpec>& regs, std::size_t i) {
  check_bindings(fm, regs);
  const auto& obs = find_reg(regs, fm.observed);
  const auto& mem = find_reg(regs, fm.memory);
  const auto& env = find_reg(regs, fm.environment);
  return tensor({StateVector::ket(obs, i),
                 StateVector::ket(mem, mem.index_of_label(fm.ready_label)),
                 StateVector::ket(env, fm.env_initial_index)});
}

LinearOp build_friend_measurement(const FriendMeasurement& fm,
                                  const std::vector<RegisterSpec>& regs) {
  check_bindings(fm, regs);
  const auto& obs = find_reg(regs, fm.observed);
  std::vector<std::vector<cplx>> inputs, outputs;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < obs.dimension; ++i) {
    auto in = ready_state(fm, regs, i);
    auto out = lab_state(fm, regs, i);
    dim = in.dimension();
    inputs.push_back(in.amplitudes());
    outputs.push_back(out.amplitudes());
  }
  return make_unitary(fm.lab(), unitary_extension(inputs, outputs, dim));
}

LinearOp build_undo(const FriendMeasurement& fm,
                    const std::vector<RegisterSpec>& regs) {
  LinearOp op = build_friend_measurement(fm, regs);
  op.matrix = op.matrix.adjoint();
  return op;
}

MeasurementSpec build_ok_fail(const FriendMeasurement& fm,
                              const std::vector<RegisterSpec>& regs) {
  check_bindings(fm, regs);
  const auto& obs = find_reg(regs, fm.observed);
  if (obs.dimension != 2)
    throw InvalidSpec("ok/fail basis needs a two-outcome friend measurement");
  const cplx half = 1.0 / std::sqrt(2.0);
  StateVector lab0 = lab_state(fm, regs, 0);
  StateVector lab1 = lab_state(fm, regs, 1);
  MeasurementSpec m;
  m.targets = fm.lab();
  m.outcome_labels = {"ok", "fail"};
  m.basis.push_back(half * lab0 - half * lab1);
  m.basis.push_back(half * lab0 + half * lab1);
  m.complete_with_other = true;
  m.validate();
  return m;
}

MeasurementSpec memory_readout(const FriendMeasurement& fm,
                               const std::vector<RegisterSpec>& regs) {
  check_bindings(fm, regs);
  const auto& obs = find_reg(regs, fm.observed);
  const auto& mem = find_reg(regs, fm.memory);
  MeasurementSpec m;
  m.targets = {fm.memory};
  for (std::size_t i = 0; i < obs.dimension; ++i) {
    m.outcome_labels.push_back(obs.label_of(i));
    m.basis.push_back(
        StateVector::ket(mem, mem.index_of_label(fm.outcome_labels[i])));
  }
  m.complete_with_other = true;  // the ready state
  m.validate();
  return m;
}

LinearOp build_notebook_write(const FriendMeasurement& fm,
                              const RegisterSpec& notebook,
                              const std::vector<RegisterSpec>& regs,
                              bool record_outcome) {
  check_bindings(fm, regs);
  const auto& mem = find_reg(regs, fm.memory);
  const std::size_t empty = notebook.index_of_label(kNotebookEmpty);

  std::vector<std::pair<std::size_t, Matrix>> cases;
  for (std::size_t i = 0; i < fm.outcome_labels.size(); ++i) {
    const std::size_t mem_idx = mem.index_of_label(fm.outcome_labels[i]);
    const std::size_t note_idx =
        record_outcome ? notebook.index_of_label(fm.outcome_labels[i])
                       : notebook.index_of_label(kNotebookDefinitive);
    Matrix swap = Matrix::identity(notebook.dimension);
    if (note_idx != empty) {
      swap.at(empty, empty) = 0.0;
      swap.at(note_idx, note_idx) = 0.0;
      swap.at(note_idx, empty) = 1.0;
      swap.at(empty, note_idx) = 1.0;
    }
    cases.emplace_back(mem_idx, std::move(swap));
  }
  return controlled(fm.memory, mem.dimension, {notebook.name}, notebook.dimension,
                    cases);
}

HadamardingCircuits hadamarding_decomposition(const MeasurementSpec& m,
                                              const std::string& record_name) {
  if (m.targets.size() != 1)
    throw InvalidSpec("hadamarding decomposition expects a single qubit-encoded lab");
  if (m.basis.empty() || m.basis.front().dimension() != 2)
    throw InvalidSpec("hadamarding decomposition expects a two-dimensional lab encoding");
  const std::string lab = m.targets.front();

  const cplx h = 1.0 / std::sqrt(2.0);
  Matrix had(2, 2);
  had.at(0, 0) = h;
  had.at(0, 1) = h;
  had.at(1, 0) = h;
  had.at(1, 1) = -h;

  Matrix cnot(4, 4);  // control = first listed register
  cnot.at(0, 0) = 1.0;
  cnot.at(1, 1) = 1.0;
  cnot.at(2, 3) = 1.0;
  cnot.at(3, 2) = 1.0;

  HadamardingCircuits out;
  out.direct = {make_unitary({lab}, had), make_unitary({lab, record_name}, cnot),
                make_unitary({lab}, had)};
  out.reversed = {make_unitary({record_name}, had),
                  make_unitary({record_name, lab}, cnot),
                  make_unitary({record_name}, had)};
  return out;
}

// Rendering ----------------------------------------------------------------

std::string render_view(const CircuitView& view) {
  std::ostringstream os;
  os << "view: " << view.agent << "\n";
  if (view.wire_order.empty()) return os.str();

  std::size_t name_w = 0;
  for (const auto& n : view.wire_order) name_w = std::max(name_w, n.size());

  std::vector<std::size_t> col_w;
  for (const auto& g : view.gates) col_w.push_back(g.op_id.size() + 2);

  for (const auto& name : view.wire_order) {
    const auto it = view.wires.find(name);
    const char fill = (it != view.wires.end() && it->second == WireKind::Classical)
                          ? '='
                          : '-';
    std::string line = name;
    line.append(name_w - name.size(), ' ');
    line += ' ';
    line += fill;
    line += fill;
    for (std::size_t gi = 0; gi < view.gates.size(); ++gi) {
      const auto& g = view.gates[gi];
      const bool on = std::find(g.registers.begin(), g.registers.end(), name) !=
                      g.registers.end();
      if (on) {
        line += (g.unitary ? '[' : '(');
        line += g.op_id;
        line += (g.unitary ? ']' : ')');
      } else {
        line.append(col_w[gi], fill);
      }
      line += fill;
      line += fill;
    }
    os << line << "\n";
  }
  return os.str();
}

bool views_consistent(const CircuitView& a, const CircuitView& b,
                      const std::map<std::string, LinearOp>& ops,
                      const std::vector<RegisterSpec>& regs) {
  std::set<std::string> ids_a, shared;
  for (const auto& g : a.gates) ids_a.insert(g.op_id);
  for (const auto& g : b.gates)
    if (ids_a.count(g.op_id)) shared.insert(g.op_id);
  if (shared.empty()) return true;

  std::size_t dim = 1;
  for (const auto& r : regs) dim *= r.dimension;

  auto compose = [&](const CircuitView& v) {
    Matrix total = Matrix::identity(dim);
    for (const auto& g : v.gates) {
      if (!shared.count(g.op_id)) continue;
      if (!g.unitary) continue;  // measurement boxes compared structurally below
      const auto it = ops.find(g.op_id);
      if (it == ops.end()) throw InvalidSpec("view references unknown op " + g.op_id);
      total = embed(it->second, regs).mul(total);
    }
    return total;
  };

  // Structural check for shared measurement gates: same registers.
  for (const auto& ga : a.gates) {
    if (ga.unitary || !shared.count(ga.op_id)) continue;
    for (const auto& gb : b.gates)
      if (gb.op_id == ga.op_id && gb.registers != ga.registers) return false;
  }
  return compose(a).approx_equal(compose(b), kTolAlgebra);
}

}  // namespace friendsim
