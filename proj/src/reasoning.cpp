#include "friendsim/reasoning.hpp"

#include <algorithm>
#include <sstream>

namespace friendsim {
namespace {

void enumerate_from(const StateVector& state, const std::vector<ViewOp>& ops,
                    std::size_t next, double weight,
                    std::map<std::string, std::string>& assignment,
                    std::vector<ViewBranch>& out) {
  if (weight <= kTolZero) return;
  if (next == ops.size()) {
    out.push_back({assignment, weight});
    return;
  }
  const ViewOp& op = ops[next];
  if (op.kind == ViewOp::Kind::Unitary) {
    enumerate_from(apply(state, op.op), ops, next + 1, weight, assignment, out);
    return;
  }
  const Distribution dist = outcome_distribution(state, op.meas);
  for (const auto& [label, p] : dist) {
    if (p <= kTolZero) continue;
    assignment[op.variable] = label;
    enumerate_from(postselect(state, op.meas, label).post, ops, next + 1,
                   weight * p, assignment, out);
  }
  assignment.erase(op.variable);
}

const ViewOp* find_measure(const AgentViewCircuit& view, const std::string& variable) {
  for (const auto& op : view.ops)
    if (op.kind == ViewOp::Kind::Measure && op.variable == variable) return &op;
  return nullptr;
}

const InferStep* find_qchain(const InferenceContext& ctx, const std::string& agent) {
  for (const auto& s : *ctx.schedule)
    if (s.kind == InferStep::Kind::QChain && s.agent == agent) return &s;
  return nullptr;
}

// The agent's own recorded (non-struck) observation of `variable`, if any.
std::optional<std::string> observed_value(const Agent& agent,
                                          const std::string& variable) {
  for (const auto& e : agent.knowledge) {
    if (e.struck) continue;
    if (e.provenance != Provenance::Observation) continue;
    if (e.statement.depth() != 0) continue;
    if (e.statement.atom.variable == variable) return e.statement.atom.value;
  }
  return std::nullopt;
}

std::string render_line(const Agent& agent, int time, const std::string& body) {
  std::ostringstream os;
  os << "[t=" << time << "] " << agent.display_name << ": \"" << body << "\"";
  return os.str();
}

}  // namespace

std::vector<ViewBranch> enumerate_view(const AgentViewCircuit& view) {
  std::vector<ViewBranch> out;
  std::map<std::string, std::string> assignment;
  enumerate_from(view.initial, view.ops, 0, 1.0, assignment, out);
  return out;
}

const std::vector<ViewBranch>& view_branches(const AgentViewCircuit& view) {
  if (!view.branch_memo)
    view.branch_memo =
        std::make_shared<const std::vector<ViewBranch>>(enumerate_view(view));
  return *view.branch_memo;
}

Distribution rule_q_conditional(const AgentViewCircuit& view,
                                const Conditioning& conditioning,
                                const std::string& target) {
  const ViewOp* target_op = find_measure(view, target);
  if (target_op == nullptr)
    throw ViewError("variable " + target + " is not measured in " + view.agent +
                    "'s view");
  for (const auto& [var, value] : conditioning) {
    const ViewOp* op = find_measure(view, var);
    if (op == nullptr)
      throw ViewError("conditioning variable " + var + " is not measured in " +
                      view.agent + "'s view");
    bool known = false;
    for (std::size_t i = 0; i < op->meas.outcome_count() && !known; ++i)
      known = op->meas.label_at(i) == value;
    if (!known)
      throw ViewError("conditioning value " + var + "=" + value +
                      " is not an outcome of that measurement");
  }

  const auto& branches = view_branches(view);
  double total = 0.0;
  std::map<std::string, double> mass;
  for (const auto& b : branches) {
    bool match = true;
    for (const auto& [var, value] : conditioning)
      if (b.assignment.at(var) != value) { match = false; break; }
    if (!match) continue;
    total += b.weight;
    mass[b.assignment.at(target)] += b.weight;
  }
  if (total <= kTolZero)
    throw InconsistentConditioning("conditioning event has probability zero in " +
                                   view.agent + "'s view");

  Distribution dist;
  for (std::size_t i = 0; i < target_op->meas.outcome_count(); ++i) {
    const std::string label = target_op->meas.label_at(i);
    const auto it = mass.find(label);
    dist.emplace_back(label, it == mass.end() ? 0.0 : it->second / total);
  }
  return dist;
}

std::optional<Statement> rule_q(const RuleQQuery& query) {
  const Distribution dist =
      rule_q_conditional(*query.view, query.conditioning, query.target);
  for (const auto& [label, p] : dist) {
    if (p < kCertainty) continue;
    Statement s;
    s.speaker = query.view->agent;
    s.time = query.statement_time;
    s.atom = Atom{query.target, label, find_measure(*query.view, query.target)->time};
    s.derivation = {query.view->agent};
    validate_statement(s);
    return s;
  }
  return std::nullopt;
}

const KnowledgeEntry& rule_c(Agent& agent, const Statement& nested, int time) {
  if (nested.depth() == 0)
    throw ProvenanceError("rule C needs a nested statement, got a direct claim");
  if (!agent.holds(nested))
    throw ProvenanceError("agent " + agent.name +
                          " adopting a statement they do not hold");
  Statement s;
  s.speaker = agent.name;
  s.time = time;
  s.nested.assign(nested.nested.begin() + 1, nested.nested.end());
  s.atom = nested.atom;
  s.derivation = nested.derivation;
  s.derivation.insert(agent.name);
  validate_statement(s);
  agent.knowledge.push_back({s, Provenance::Adoption, false, -1});
  return agent.knowledge.back();
}

std::optional<Contradiction> rule_s_check(const Agent& agent) {
  const auto& ks = agent.knowledge;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i].struck || ks[i].statement.depth() != 0) continue;
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
      if (ks[j].struck || ks[j].statement.depth() != 0) continue;
      const Atom& a = ks[i].statement.atom;
      const Atom& b = ks[j].statement.atom;
      if (a.variable == b.variable && a.time == b.time && a.value != b.value)
        return Contradiction{agent.name, a.variable, a.time, a.value, b.value};
    }
  }
  return std::nullopt;
}

std::string render_contradiction(const Contradiction& c,
                                 const std::vector<Agent>& agents, int check_time) {
  const Agent& agent = find_agent(agents, c.agent);
  return render_line(agent, check_time,
                     "I am certain that " + c.variable + "=" + c.value_a +
                         " and I am certain that " + c.variable + "=" + c.value_b +
                         ".");
}

std::optional<Statement> derive_conclusion(const InferenceContext& ctx,
                                           const std::string& agent,
                                           const Conditioning& conditioning) {
  const InferStep* step = find_qchain(ctx, agent);
  if (step == nullptr) return std::nullopt;
  const auto view_it = ctx.views->find(agent);
  if (view_it == ctx.views->end())
    throw ViewError("no view circuit for agent " + agent);

  RuleQQuery query;
  query.view = &view_it->second;
  query.conditioning = conditioning;
  query.target = step->q_target;
  query.statement_time = step->time;
  const auto direct = rule_q(query);
  if (!direct) return std::nullopt;
  if (step->chain_via.empty()) return direct;

  const auto inner = derive_conclusion(
      ctx, step->chain_via, {{step->q_target, direct->atom.value}});
  if (!inner) return std::nullopt;
  Statement s;
  s.speaker = agent;
  s.time = step->time;
  s.atom = inner->atom;
  s.derivation = inner->derivation;
  s.derivation.insert(agent);
  validate_statement(s);
  return s;
}

namespace {

StepOutcome run_infer_step_impl(InferenceContext& ctx, const InferStep& step) {
  StepOutcome out;
  if (ctx.invalidation_hook) ctx.invalidation_hook(step.time);
  Agent& agent = find_agent(*ctx.agents, step.agent);

  switch (step.kind) {
    case InferStep::Kind::Observe: {
      for (const auto& o : *ctx.log) {
        if (o.agent != step.agent || o.variable != step.variable) continue;
        const auto& entry =
            record_observation(agent, *ctx.log, o.variable, o.value, o.time);
        out.statements.push_back(render_entry(entry, *ctx.agents));
      }
      break;
    }

    case InferStep::Kind::QChain: {
      Conditioning conditioning;
      for (const auto& var : step.conditioning) {
        const auto value = observed_value(agent, var);
        if (!value) return out;  // nothing observed, nothing to infer from
        conditioning.emplace_back(var, *value);
      }
      const auto view_it = ctx.views->find(step.agent);
      if (view_it == ctx.views->end())
        throw ViewError("no view circuit for agent " + step.agent);

      RuleQQuery query;
      query.view = &view_it->second;
      query.conditioning = conditioning;
      query.target = step.q_target;
      query.statement_time = step.time;
      const auto direct = rule_q(query);
      if (!direct) return out;  // conditional strictly below certainty
      agent.knowledge.push_back({*direct, Provenance::Inference, false, -1});

      Statement conclusion = *direct;
      if (!step.chain_via.empty()) {
        const auto inner = derive_conclusion(
            ctx, step.chain_via, {{step.q_target, direct->atom.value}});
        if (!inner) {
          // The cited agent reaches no certainty; only the direct claim stands.
          out.statements.push_back(
              render_entry(agent.knowledge.back(), *ctx.agents));
          return out;
        }

        // "certain that <via> observed x=v and hence <pronoun> is certain
        // that z=w at t=n" held as the nested statement Certain(via, z=w).
        Statement nested;
        nested.speaker = step.agent;
        nested.time = step.time;
        nested.nested = {step.chain_via};
        nested.atom = inner->atom;
        nested.derivation = inner->derivation;
        nested.derivation.insert(step.agent);
        validate_statement(nested);
        agent.knowledge.push_back({nested, Provenance::Inference, false, -1});

        const Agent& via = find_agent(*ctx.agents, step.chain_via);
        out.statements.push_back(render_line(
            agent, step.time,
            "I am certain that " + via.display_name + " observed " +
                render_atom(direct->atom, false) + " and hence " + via.pronoun +
                " is certain that " + render_atom(inner->atom, true) + "."));

        const auto& adopted = rule_c(agent, nested, step.time);
        out.statements.push_back(render_entry(adopted, *ctx.agents));
        conclusion = adopted.statement;
      } else {
        out.statements.push_back(
            render_entry(agent.knowledge.back(), *ctx.agents));
      }

      if (step.announce && conclusion.depth() == 0) {
        Announcement ann{step.agent, step.announce_to, conclusion, step.time};
        ctx.announcements->push_back(ann);
      }
      break;
    }

    case InferStep::Kind::AdoptAnnounced: {
      for (const auto& ann : *ctx.announcements) {
        if (!ann.to.empty() && ann.to != step.agent) continue;
        if (ann.from == step.agent) continue;
        const Agent& sender = find_agent(*ctx.agents, ann.from);
        if (!receive_announcement(agent, sender, ann, step.time)) continue;
        const KnowledgeEntry received = agent.knowledge.back();
        out.statements.push_back(render_entry(received, *ctx.agents));
        const auto& adopted = rule_c(agent, received.statement, step.time);
        out.statements.push_back(render_entry(adopted, *ctx.agents));
      }
      break;
    }

    case InferStep::Kind::Check: {
      out.contradiction = rule_s_check(agent);
      if (out.contradiction)
        out.statements.push_back(
            render_contradiction(*out.contradiction, *ctx.agents, step.time));
      break;
    }
  }
  return out;
}

}  // namespace

StepOutcome run_infer_step(InferenceContext& ctx, const InferStep& step) {
  StepOutcome out = run_infer_step_impl(ctx, step);
  if (ctx.transcript)
    for (const auto& line : out.statements) ctx.transcript->push_back(line);
  return out;
}

ScheduleResult run_inference_schedule(InferenceContext& ctx) {
  ScheduleResult result;
  std::vector<std::string>* saved = ctx.transcript;
  ctx.transcript = &result.transcript;
  for (const auto& step : *ctx.schedule) {
    const auto outcome = run_infer_step(ctx, step);
    if (outcome.contradiction && !result.contradiction)
      result.contradiction = outcome.contradiction;
  }
  ctx.transcript = saved;
  return result;
}

}  // namespace friendsim
