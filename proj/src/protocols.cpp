#include "friendsim/protocols.hpp"

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

// Outcome selection: sampling and exact enumeration share one interface.
// PresetChooser raises ChoiceRequest at the first undetermined choice point;
// the exact-analysis driver catches it and forks per outcome.
struct ChoiceRequest {
  std::vector<double> probs;
};

struct Chooser {
  virtual ~Chooser() = default;
  virtual std::size_t choose(const std::vector<double>& probs) = 0;
};

struct RngChooser final : Chooser {
  SplitMix64 rng;
  explicit RngChooser(std::uint64_t seed) : rng(seed) {}
  std::size_t choose(const std::vector<double>& probs) override {
    const double x = rng.next_double();
    double cum = 0.0;
    std::size_t last_live = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= kTolZero) continue;
      last_live = i;
      cum += probs[i];
      if (x < cum) return i;
    }
    if (last_live == probs.size())
      throw ImpossibleOutcome("no outcome has positive probability");
    return last_live;  // floating-point residue falls to the last live outcome
  }
};

struct PresetChooser final : Chooser {
  std::vector<std::size_t> preset;
  std::size_t used = 0;
  std::vector<double> chosen_probs;
  std::size_t choose(const std::vector<double>& probs) override {
    if (used == preset.size()) throw ChoiceRequest{probs};
    const std::size_t pick = preset[used++];
    chosen_probs.push_back(probs[pick]);
    return pick;
  }
};

// A sampled-but-uncollapsed friend outcome: the memory register holds basis
// index `index` on the branch this run is following. Alive records condition
// later sampling; operations that scramble the register kill them.
struct Record {
  std::string variable;
  std::string reg;
  std::size_t index = 0;
  bool alive = true;
};

std::vector<std::pair<std::string, std::size_t>> alive_conditions(
    const std::vector<Record>& records) {
  std::vector<std::pair<std::string, std::size_t>> conds;
  for (const auto& r : records)
    if (r.alive) conds.emplace_back(r.reg, r.index);
  return conds;
}

void kill_by_unitary(std::vector<Record>& records, const LinearOp& op,
                     const std::vector<RegisterSpec>& regs) {
  for (auto& r : records) {
    if (!r.alive) continue;
    if (std::find(op.targets.begin(), op.targets.end(), r.reg) == op.targets.end())
      continue;
    if (!preserves_register_basis(op, regs, r.reg)) r.alive = false;
  }
}

void kill_by_measurement(std::vector<Record>& records, const MeasurementSpec& m,
                         const std::vector<RegisterSpec>& regs) {
  for (auto& r : records) {
    if (!r.alive) continue;
    if (std::find(m.targets.begin(), m.targets.end(), r.reg) == m.targets.end())
      continue;
    if (!measurement_preserves_register_basis(m, regs, r.reg)) r.alive = false;
  }
}

// Conditional outcome distribution given every alive record, computed by
// projecting the records' branches first. The state itself is untouched.
std::vector<double> conditional_probs(const StateVector& state,
                                      const MeasurementSpec& m,
                                      const std::vector<Record>& records,
                                      const std::vector<RegisterSpec>& regs) {
  StateVector conditioned = state;
  for (const auto& [reg, index] : alive_conditions(records)) {
    const RegisterSpec& spec = find_reg(regs, reg);
    conditioned =
        postselect(conditioned, computational_measurement(spec), spec.label_of(index))
            .post;
  }
  const Distribution dist = outcome_distribution(conditioned, m);
  std::vector<double> probs;
  probs.reserve(dist.size());
  for (const auto& [label, p] : dist) probs.push_back(p);
  return probs;
}

ActionContext action_context(const ExperimentScript& script, const ScriptStep& step) {
  ActionContext ctx;
  ctx.actor = step.actor;
  for (const auto& a : script.agents)
    if (a.name == step.actor) ctx.actor_lab = a.lab_registers;
  if (const auto* p = std::get_if<Prepare>(&step.action)) {
    ctx.kind = ActionContext::Kind::Unitary;
    ctx.targets = p->op.targets;
  } else if (const auto* f = std::get_if<FriendMeasureAction>(&step.action)) {
    ctx.kind = ActionContext::Kind::FriendMeasure;
    ctx.targets = f->fm.lab();
  } else if (const auto* o = std::get_if<OutsideMeasureAction>(&step.action)) {
    ctx.kind = ActionContext::Kind::OutsideMeasure;
    ctx.targets = o->spec.targets;
  } else if (const auto* u = std::get_if<UndoAction>(&step.action)) {
    ctx.kind = ActionContext::Kind::Unitary;
    ctx.targets = u->op.targets;
  } else if (const auto* n = std::get_if<NotebookWriteAction>(&step.action)) {
    ctx.kind = ActionContext::Kind::Unitary;
    ctx.targets = n->op.targets;
  } else {
    ctx.kind = ActionContext::Kind::Classical;
  }
  return ctx;
}

RunTrace execute_impl(const ExperimentScript& script, const Policy& policy,
                      Chooser& chooser, std::uint64_t seed,
                      const std::map<std::string, AgentViewCircuit>& views) {
  RunTrace trace;
  trace.seed = seed;
  StateVector state = initial_state(script);
  std::vector<Agent> agents = script.agents;
  std::vector<Record> records;
  std::vector<HadamardEvent> hevents;
  std::vector<Announcement> announcements;
  const std::vector<InferStep> schedule = inference_schedule(script);

  InferenceContext ictx;
  ictx.agents = &agents;
  ictx.views = &views;
  ictx.schedule = &schedule;
  ictx.log = &trace.log;
  ictx.announcements = &announcements;
  ictx.transcript = &trace.transcript;
  ictx.invalidation_hook = [&](int now) {
    auto newly = invalidate_on_hadamarding(policy, agents, hevents, now);
    trace.struck.insert(trace.struck.end(), newly.begin(), newly.end());
  };

  for (const auto& step : script.steps) {
    const Legality ruling = legal(policy, action_context(script, step));
    if (!ruling.allowed) {
      trace.violation = ViolationRecord{step.time, step.op_id, ruling.reason};
      trace.verdict = Verdict::Aborted;
      TraceEvent ev;
      ev.time = step.time;
      ev.actor = step.actor;
      ev.kind = "violation";
      ev.op_id = step.op_id;
      ev.outcome = ruling.reason;
      trace.events.push_back(ev);
      break;
    }

    TraceEvent ev;
    ev.time = step.time;
    ev.actor = step.actor;
    ev.op_id = step.op_id;

    if (const auto* p = std::get_if<Prepare>(&step.action)) {
      ev.kind = "prepare";
      kill_by_unitary(records, p->op, script.registers);
      state = apply(state, p->op);

    } else if (const auto* f = std::get_if<FriendMeasureAction>(&step.action)) {
      ev.kind = "friend-measure";
      ev.variable = f->fm.variable;
      kill_by_unitary(records, f->unitary, script.registers);
      state = apply(state, f->unitary);

      const MeasurementSpec readout = memory_readout(f->fm, script.registers);
      const std::vector<double> probs =
          conditional_probs(state, readout, records, script.registers);
      const std::size_t pick = chooser.choose(probs);
      const std::string value = readout.label_at(pick);
      ev.outcome = value;
      ev.probability = probs[pick];

      if (collapses_friend_measure(policy, f->fm)) {
        state = postselect(state, readout, value).post;
      }
      const RegisterSpec& mem = find_reg(script.registers, f->fm.memory);
      records.push_back({f->fm.variable, f->fm.memory,
                         mem.index_of_label(f->fm.outcome_labels.at(pick)), true});
      trace.values[f->fm.variable] = value;
      trace.log.push_back({f->fm.agent, f->fm.variable, value, step.time});

    } else if (const auto* s = std::get_if<SendAction>(&step.action)) {
      ev.kind = "send";
      ev.outcome = s->reg + ": " + s->from + " -> " + s->to;

    } else if (const auto* o = std::get_if<OutsideMeasureAction>(&step.action)) {
      ev.kind = "outside-measure";
      ev.variable = o->variable;
      // Records on registers this measurement scrambles die before sampling;
      // the state then collapses by the sampled outcome's projector alone.
      kill_by_measurement(records, o->spec, script.registers);
      const std::vector<double> probs =
          conditional_probs(state, o->spec, records, script.registers);
      const std::size_t pick = chooser.choose(probs);
      const std::string value = o->spec.label_at(pick);
      ev.outcome = value;
      ev.probability = probs[pick];
      state = postselect(state, o->spec, value).post;
      trace.values[o->variable] = value;
      trace.log.push_back({step.actor, o->variable, value, step.time});
      for (const auto& agent : o->hadamarded_agents)
        hevents.push_back({agent, step.time});
      ictx.invalidation_hook(step.time);

    } else if (const auto* u = std::get_if<UndoAction>(&step.action)) {
      ev.kind = "undo";
      ev.outcome = "reverts " + u->agent;
      kill_by_unitary(records, u->op, script.registers);
      state = apply(state, u->op);

    } else if (const auto* n = std::get_if<NotebookWriteAction>(&step.action)) {
      ev.kind = "notebook-write";
      kill_by_unitary(records, n->op, script.registers);
      state = apply(state, n->op);

    } else if (const auto* inf = std::get_if<InferAction>(&step.action)) {
      ev.kind = "infer";
      for (const auto& istep : inf->steps) {
        const StepOutcome outcome = run_infer_step(ictx, istep);
        ev.statements.insert(ev.statements.end(), outcome.statements.begin(),
                             outcome.statements.end());
        if (outcome.contradiction && !trace.contradiction) {
          trace.contradiction = outcome.contradiction;
          trace.verdict = Verdict::Contradiction;
        }
      }

    } else if (const auto* an = std::get_if<AnnounceAction>(&step.action)) {
      ev.kind = "announce";
      const Agent& sender = find_agent(agents, an->from);
      const KnowledgeEntry* latest = nullptr;
      for (const auto& e : sender.knowledge) {
        if (e.struck || e.statement.depth() != 0) continue;
        if (e.provenance == Provenance::Observation) continue;
        if (e.statement.atom.variable != an->variable) continue;
        latest = &e;
      }
      if (latest != nullptr) {
        announcements.push_back(
            {an->from, an->to, latest->statement, step.time});
        ev.variable = an->variable;
        ev.outcome = latest->statement.atom.value;
      } else {
        ev.outcome = "nothing to announce";
      }

    } else if (const auto* cmp = std::get_if<CompareAction>(&step.action)) {
      ev.kind = "compare";
      ev.variable = cmp->variable;
      ictx.invalidation_hook(step.time);
      Agent& agent = find_agent(agents, cmp->agent);
      const auto c = rule_s_check(agent);
      if (c) {
        trace.contradiction = c;
        trace.verdict = Verdict::Contradiction;
        const std::string line = render_contradiction(*c, agents, step.time);
        trace.transcript.push_back(line);
        ev.statements.push_back(line);
        ev.outcome = "contradiction";
      } else {
        ev.outcome = "consistent";
      }
    }

    trace.events.push_back(ev);
  }

  trace.final_agents = agents;
  trace.final_state = state;
  return trace;
}

}  // namespace

void validate_script(const ExperimentScript& script) {
  check_register_list(script.registers);
  for (const auto& [name, amps] : script.initial) {
    const RegisterSpec& reg = find_reg(script.registers, name);
    if (amps.size() != reg.dimension)
      throw InvalidSpec("initial amplitudes for " + name + " have length " +
                        std::to_string(amps.size()) + ", register dimension is " +
                        std::to_string(reg.dimension));
    double n2 = 0.0;
    for (const auto& a : amps) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > kTolDistribution)
      throw InvalidSpec("initial amplitudes for " + name + " are not normalised");
  }

  int last_time = std::numeric_limits<int>::min();
  // First touch assigns unowned registers; Send moves one register between
  // labs. No physical action may span two labs.
  std::map<std::string, std::string> owner;
  for (const auto& a : script.agents)
    for (const auto& r : a.lab_registers) {
      find_reg(script.registers, r);
      owner[r] = a.name;
    }

  for (const auto& step : script.steps) {
    if (step.time < last_time)
      throw InvalidSpec("step times must be non-decreasing (op " + step.op_id + ")");
    last_time = step.time;

    const ActionContext ctx = action_context(script, step);
    for (const auto& t : ctx.targets) find_reg(script.registers, t);

    if (const auto* s = std::get_if<SendAction>(&step.action)) {
      find_reg(script.registers, s->reg);
      const auto it = owner.find(s->reg);
      if (it != owner.end() && it->second != s->from)
        throw InvalidSpec("send of " + s->reg + " by " + s->from +
                          " but the register sits in " + it->second + "'s lab");
      owner[s->reg] = s->to;
      continue;
    }
    if (ctx.kind == ActionContext::Kind::Classical) continue;

    std::set<std::string> labs;
    for (const auto& t : ctx.targets) {
      const auto it = owner.find(t);
      if (it == owner.end()) {
        if (!ctx.actor.empty()) owner[t] = ctx.actor;  // first touch
        continue;
      }
      labs.insert(it->second);
    }
    if (labs.size() > 1)
      throw InvalidSpec("operation " + step.op_id +
                        " touches registers of two different labs");
  }
}

StateVector initial_state(const ExperimentScript& script) {
  std::vector<StateVector> parts;
  parts.reserve(script.registers.size());
  for (const auto& reg : script.registers) {
    const auto it = script.initial.find(reg.name);
    if (it == script.initial.end())
      parts.push_back(StateVector::ket(reg, std::size_t{0}));
    else
      parts.push_back(StateVector::ket(reg, it->second));
  }
  return tensor(parts);
}

std::map<std::string, AgentViewCircuit> build_views(const ExperimentScript& script) {
  std::map<std::string, AgentViewCircuit> views;
  const StateVector init = initial_state(script);
  for (const auto& agent : script.agents) {
    AgentViewCircuit view;
    view.agent = agent.name;
    view.initial = init;
    const auto classical = [&](const std::string& v) {
      return std::find(agent.classical_variables.begin(),
                       agent.classical_variables.end(),
                       v) != agent.classical_variables.end();
    };
    for (const auto& step : script.steps) {
      if (const auto* p = std::get_if<Prepare>(&step.action)) {
        view.ops.push_back(
            {ViewOp::Kind::Unitary, p->op, {}, "", step.time, step.op_id});
      } else if (const auto* f = std::get_if<FriendMeasureAction>(&step.action)) {
        view.ops.push_back(
            {ViewOp::Kind::Unitary, f->unitary, {}, "", step.time, step.op_id});
        if (classical(f->fm.variable))
          view.ops.push_back({ViewOp::Kind::Measure,
                              {},
                              memory_readout(f->fm, script.registers),
                              f->fm.variable,
                              step.time,
                              step.op_id});
      } else if (const auto* o = std::get_if<OutsideMeasureAction>(&step.action)) {
        if (classical(o->variable))
          view.ops.push_back({ViewOp::Kind::Measure, {}, o->spec, o->variable,
                              step.time, step.op_id});
      } else if (const auto* u = std::get_if<UndoAction>(&step.action)) {
        view.ops.push_back(
            {ViewOp::Kind::Unitary, u->op, {}, "", step.time, step.op_id});
      } else if (const auto* n = std::get_if<NotebookWriteAction>(&step.action)) {
        view.ops.push_back(
            {ViewOp::Kind::Unitary, n->op, {}, "", step.time, step.op_id});
      }
    }
    views.emplace(agent.name, std::move(view));
  }
  return views;
}

std::vector<InferStep> inference_schedule(const ExperimentScript& script) {
  std::vector<InferStep> schedule;
  for (const auto& step : script.steps)
    if (const auto* inf = std::get_if<InferAction>(&step.action))
      schedule.insert(schedule.end(), inf->steps.begin(), inf->steps.end());
  return schedule;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Contradiction: return "contradiction";
    case Verdict::Aborted: return "aborted";
  }
  return "consistent";
}

RunTrace execute(const ExperimentScript& script, const Policy& policy,
                 std::uint64_t seed) {
  const auto views = build_views(script);
  return execute(script, policy, seed, views);
}

RunTrace execute(const ExperimentScript& script, const Policy& policy,
                 std::uint64_t seed,
                 const std::map<std::string, AgentViewCircuit>& views) {
  RngChooser chooser(seed);
  return execute_impl(script, policy, chooser, seed, views);
}

Distribution ExactAnalysis::marginal(const std::string& variable) const {
  std::map<std::string, double> mass;
  for (const auto& b : branches) {
    const auto it = b.values.find(variable);
    mass[it == b.values.end() ? "(unmeasured)" : it->second] += b.probability;
  }
  Distribution dist(mass.begin(), mass.end());
  return dist;
}

double ExactAnalysis::joint(
    const std::vector<std::pair<std::string, std::string>>& event) const {
  double p = 0.0;
  for (const auto& b : branches) {
    bool match = true;
    for (const auto& [var, value] : event) {
      const auto it = b.values.find(var);
      if (it == b.values.end() || it->second != value) {
        match = false;
        break;
      }
    }
    if (match) p += b.probability;
  }
  return p;
}

double ExactAnalysis::contradiction_probability() const {
  double p = 0.0;
  for (const auto& b : branches)
    if (b.verdict == Verdict::Contradiction) p += b.probability;
  return p;
}

namespace {

void exact_dfs(const ExperimentScript& script, const Policy& policy,
               const std::map<std::string, AgentViewCircuit>& views,
               std::vector<std::size_t>& preset, ExactAnalysis& out) {
  PresetChooser chooser;
  chooser.preset = preset;
  try {
    RunTrace trace = execute_impl(script, policy, chooser, 0, views);
    BranchResult branch;
    branch.probability = 1.0;
    for (const double p : chooser.chosen_probs) branch.probability *= p;
    branch.values = trace.values;
    branch.verdict = trace.verdict;
    branch.contradiction = trace.contradiction;
    branch.transcript = trace.transcript;
    branch.struck = trace.struck;
    branch.violation = trace.violation;
    out.branches.push_back(std::move(branch));
  } catch (const ChoiceRequest& req) {
    for (std::size_t i = 0; i < req.probs.size(); ++i) {
      if (req.probs[i] <= kTolZero) continue;
      preset.push_back(i);
      exact_dfs(script, policy, views, preset, out);
      preset.pop_back();
    }
  }
}

}  // namespace

ExactAnalysis exact_analysis(const ExperimentScript& script, const Policy& policy) {
  const auto views = build_views(script);
  ExactAnalysis out;
  std::vector<std::size_t> preset;
  exact_dfs(script, policy, views, preset, out);
  return out;
}

// Stock experiments ---------------------------------------------------------

namespace {

Matrix hadamard2() {
  const double h = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m.at(0, 0) = h;
  m.at(0, 1) = h;
  m.at(1, 0) = h;
  m.at(1, 1) = -h;
  return m;
}

FriendMeasurement friend_measurement(const std::string& agent,
                                     const std::string& observed,
                                     const std::string& memory,
                                     const std::string& environment,
                                     const std::string& variable,
                                     const std::string& label_prefix) {
  FriendMeasurement fm;
  fm.agent = agent;
  fm.observed = observed;
  fm.memory = memory;
  fm.environment = environment;
  fm.variable = variable;
  fm.outcome_labels = {label_prefix + variable + "=0.",
                       label_prefix + variable + "=1."};
  return fm;
}

RegisterSpec memory_register(const std::string& name, const FriendMeasurement& fm) {
  RegisterSpec reg;
  reg.name = name;
  reg.dimension = 3;
  reg.role = RegisterRole::Memory;
  reg.basis_labels = {fm.ready_label, fm.outcome_labels[0], fm.outcome_labels[1]};
  return reg;
}

RegisterSpec plain_register(const std::string& name, RegisterRole role) {
  RegisterSpec reg;
  reg.name = name;
  reg.dimension = 2;
  reg.role = role;
  return reg;
}

}  // namespace

ExperimentScript script_wigner(std::vector<cplx> r_init) {
  const double h = 1.0 / std::sqrt(2.0);
  if (r_init.empty()) r_init = {h, h};

  ExperimentScript script;
  script.name = "wigner";
  FriendMeasurement fm =
      friend_measurement("alice", "R", "A", "Aenv", "a", "I observed ");
  script.registers = {plain_register("R", RegisterRole::System),
                      memory_register("A", fm),
                      plain_register("Aenv", RegisterRole::Environment)};
  script.initial["R"] = std::move(r_init);

  Agent alice{"alice", "Alice", "she", "A", {"R", "A", "Aenv"}, {"a"}, {}};
  Agent wigner{"wigner", "Wigner", "he", "", {}, {}, {}};
  script.agents = {alice, wigner};

  script.steps.push_back(
      {1, "alice",
       FriendMeasureAction{fm, build_friend_measurement(fm, script.registers)},
       "MA"});
  script.steps.push_back(
      {1, "alice",
       InferAction{{InferStep{InferStep::Kind::Observe, "alice", 1, "a", "", {},
                              "", false, ""}}},
       "IA"});
  script.observables = {"a"};
  validate_script(script);
  return script;
}

ExperimentScript script_deutsch(std::vector<cplx> r_init) {
  const double h = 1.0 / std::sqrt(2.0);
  if (r_init.empty()) r_init = {h, h};

  ExperimentScript script;
  script.name = "deutsch";
  FriendMeasurement fm =
      friend_measurement("alice", "R", "A", "Aenv", "a", "I observed ");
  RegisterSpec notebook;
  notebook.name = "N";
  notebook.dimension = 2;
  notebook.role = RegisterRole::Notebook;
  notebook.basis_labels = {kNotebookEmpty, kNotebookDefinitive};
  script.registers = {plain_register("R", RegisterRole::System),
                      memory_register("A", fm),
                      plain_register("Aenv", RegisterRole::Environment), notebook};
  script.initial["R"] = std::move(r_init);

  Agent alice{"alice", "Alice", "she", "A", {"R", "A", "Aenv"}, {"a"}, {}};
  Agent wigner{"wigner", "Wigner", "he", "", {}, {"p"}, {}};
  script.agents = {alice, wigner};

  script.steps.push_back(
      {1, "alice",
       FriendMeasureAction{fm, build_friend_measurement(fm, script.registers)},
       "MA"});
  script.steps.push_back(
      {1, "alice",
       InferAction{{InferStep{InferStep::Kind::Observe, "alice", 1, "a", "", {},
                              "", false, ""}}},
       "IA"});
  script.steps.push_back(
      {2, "alice",
       NotebookWriteAction{build_notebook_write(fm, notebook, script.registers)},
       "NW"});
  script.steps.push_back(
      {3, "wigner", UndoAction{build_undo(fm, script.registers), "alice"}, "UNDO"});

  MeasurementSpec plus_check;
  plus_check.targets = {"R"};
  plus_check.outcome_labels = {"plus"};
  plus_check.basis = {StateVector::ket(script.registers[0], {h, h})};
  plus_check.complete_with_other = true;
  plus_check.other_label = "minus";
  plus_check.validate();
  script.steps.push_back(
      {4, "wigner", OutsideMeasureAction{plus_check, "p", {"alice"}}, "PF"});

  script.observables = {"a", "p"};
  validate_script(script);
  return script;
}

ExperimentScript script_fr() {
  ExperimentScript script;
  script.name = "fr";

  FriendMeasurement fm_a =
      friend_measurement("alice", "R", "A", "Aenv", "a", "I am certain that ");
  FriendMeasurement fm_b =
      friend_measurement("bob", "S", "B", "Benv", "b", "I am certain that ");
  script.registers = {plain_register("R", RegisterRole::System),
                      memory_register("A", fm_a),
                      plain_register("Aenv", RegisterRole::Environment),
                      plain_register("S", RegisterRole::System),
                      memory_register("B", fm_b),
                      plain_register("Benv", RegisterRole::Environment)};
  script.initial["R"] = {std::sqrt(1.0 / 3.0), std::sqrt(2.0 / 3.0)};

  Agent alice{"alice", "Alice", "she", "A", {"R", "A", "Aenv"}, {"a", "w"}, {}};
  Agent bob{"bob", "Bob", "he", "B", {"B", "Benv"}, {"a", "b"}, {}};
  Agent ursula{"ursula", "Ursula", "she", "", {}, {"b", "u"}, {}};
  Agent wigner{"wigner", "Wigner", "he", "", {}, {"u", "w"}, {}};
  script.agents = {alice, bob, ursula, wigner};

  // t=1: Alice measures R, prepares S from her outcome, sends S, infers w.
  script.steps.push_back(
      {1, "alice",
       FriendMeasureAction{fm_a, build_friend_measurement(fm_a, script.registers)},
       "MA"});
  script.steps.push_back(
      {1, "alice",
       Prepare{controlled("A", 3, {"S"}, 2, {{2, hadamard2()}}),
               "S from a: a=0 keeps |0>, a=1 prepares |+>"},
       "PS"});
  script.steps.push_back({1, "alice", SendAction{"S", "alice", "bob"}, "TX"});
  script.steps.push_back(
      {1, "alice",
       InferAction{{InferStep{InferStep::Kind::Observe, "alice", 1, "a", "", {},
                              "", false, ""},
                    InferStep{InferStep::Kind::QChain, "alice", 1, "", "w",
                              {"a"}, "", false, ""}}},
       "IA"});

  // t=2: Bob measures S, infers a, adopts Alice's prediction.
  script.steps.push_back(
      {2, "bob",
       FriendMeasureAction{fm_b, build_friend_measurement(fm_b, script.registers)},
       "MB"});
  script.steps.push_back(
      {2, "bob",
       InferAction{{InferStep{InferStep::Kind::Observe, "bob", 2, "b", "", {},
                              "", false, ""},
                    InferStep{InferStep::Kind::QChain, "bob", 2, "", "a", {"b"},
                              "alice", false, ""}}},
       "IB"});

  // t=3: Ursula measures Alice's lab in ok/fail, infers b, adopts, announces.
  script.steps.push_back(
      {3, "ursula",
       OutsideMeasureAction{build_ok_fail(fm_a, script.registers), "u", {"alice"}},
       "MU"});
  script.steps.push_back(
      {3, "ursula",
       InferAction{{InferStep{InferStep::Kind::Observe, "ursula", 3, "u", "",
                              {}, "", false, ""},
                    InferStep{InferStep::Kind::QChain, "ursula", 3, "", "b",
                              {"u"}, "bob", false, ""}}},
       "IU"});
  script.steps.push_back({3, "ursula", AnnounceAction{"ursula", "wigner", "w"}, "AN"});

  // t=4: Wigner adopts the announcement, measures Bob's lab, observes w.
  script.steps.push_back(
      {4, "wigner",
       InferAction{{InferStep{InferStep::Kind::AdoptAnnounced, "wigner", 4, "",
                              "", {}, "", false, ""}}},
       "IW"});
  script.steps.push_back(
      {4, "wigner",
       OutsideMeasureAction{build_ok_fail(fm_b, script.registers), "w", {"bob"}},
       "MW"});
  script.steps.push_back(
      {4, "wigner",
       InferAction{{InferStep{InferStep::Kind::Observe, "wigner", 4, "w", "",
                              {}, "", false, ""}}},
       "OW"});

  // t=5: Wigner compares his prediction with the observed value.
  script.steps.push_back({5, "wigner", CompareAction{"wigner", "w"}, "CMP"});

  script.comparison_variable = "w";
  script.observables = {"a", "b", "u", "w"};
  validate_script(script);
  return script;
}

}  // namespace friendsim
