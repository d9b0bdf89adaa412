#include "friendsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace friendsim {
namespace {

std::string loc(int line) { return "line " + std::to_string(line) + ": "; }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

struct Line {
  int indent = 0;
  std::string text;
  int number = 0;
};

std::vector<Line> significant_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t i = 0;
    while (i < raw.size() && raw[i] == ' ') ++i;
    if (i == raw.size()) continue;
    if (raw[i] == '#') continue;
    if (raw[i] == '\t')
      throw ConfigError(loc(number) + "tabs are not allowed, indent with spaces");
    out.push_back({static_cast<int>(i), raw.substr(i), number});
  }
  return out;
}

bool is_list_item(const std::string& text) {
  return text == "-" || text.rfind("- ", 0) == 0;
}

// Splits "key: value" / "key:"; returns false when the text has no key shape.
bool split_entry(const std::string& text, std::string& key, std::string& value) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0) return false;
  if (colon + 1 < text.size() && text[colon + 1] != ' ') return false;
  key = trim(text.substr(0, colon));
  value = colon + 1 < text.size() ? trim(text.substr(colon + 1)) : "";
  return !key.empty();
}

struct Parser {
  const std::vector<Line>& lines;
  std::size_t pos = 0;

  ConfigNode parse_block(int indent) {
    if (pos >= lines.size() || lines[pos].indent != indent)
      throw ConfigError(loc(pos < lines.size() ? lines[pos].number : 0) +
                        "expected an indented block");
    if (is_list_item(lines[pos].text)) return parse_list(indent);
    return parse_map(indent);
  }

  ConfigNode parse_map(int indent) {
    ConfigNode node;
    node.kind = ConfigNode::Kind::Map;
    node.line = lines[pos].number;
    while (pos < lines.size() && lines[pos].indent == indent &&
           !is_list_item(lines[pos].text)) {
      const Line& line = lines[pos];
      std::string key, value;
      if (!split_entry(line.text, key, value))
        throw ConfigError(loc(line.number) + "expected 'key: value' or 'key:'");
      for (const auto& [k, v] : node.entries)
        if (k == key)
          throw ConfigError(loc(line.number) + "duplicate key '" + key + "'");
      ++pos;
      node.entries.emplace_back(key, parse_value(value, line, indent));
    }
    if (pos < lines.size() && lines[pos].indent > indent)
      throw ConfigError(loc(lines[pos].number) + "unexpected indentation");
    return node;
  }

  ConfigNode parse_value(const std::string& value, const Line& line, int indent) {
    if (!value.empty()) {
      ConfigNode scalar;
      scalar.kind = ConfigNode::Kind::Scalar;
      scalar.line = line.number;
      scalar.scalar = value;
      return scalar;
    }
    if (pos >= lines.size() || lines[pos].indent <= indent)
      throw ConfigError(loc(line.number) + "'" + line.text +
                        "' needs a value or an indented block");
    if (lines[pos].indent != indent + 2)
      throw ConfigError(loc(lines[pos].number) +
                        "indentation must step by two spaces");
    return parse_block(indent + 2);
  }

  ConfigNode parse_list(int indent) {
    ConfigNode node;
    node.kind = ConfigNode::Kind::List;
    node.line = lines[pos].number;
    while (pos < lines.size() && lines[pos].indent == indent &&
           is_list_item(lines[pos].text)) {
      const Line& line = lines[pos];
      const std::string content =
          line.text.size() > 2 ? trim(line.text.substr(2)) : "";
      if (content.empty())
        throw ConfigError(loc(line.number) + "empty list item");
      std::string key, value;
      if (split_entry(content, key, value)) {
        ++pos;
        ConfigNode item;
        item.kind = ConfigNode::Kind::Map;
        item.line = line.number;
        Line first = line;
        first.indent = indent + 2;
        item.entries.emplace_back(key, parse_value(value, first, indent + 2));
        while (pos < lines.size() && lines[pos].indent == indent + 2 &&
               !is_list_item(lines[pos].text)) {
          const Line& cont = lines[pos];
          std::string ckey, cvalue;
          if (!split_entry(cont.text, ckey, cvalue))
            throw ConfigError(loc(cont.number) +
                              "expected 'key: value' or 'key:'");
          for (const auto& [k, v] : item.entries)
            if (k == ckey)
              throw ConfigError(loc(cont.number) + "duplicate key '" + ckey + "'");
          ++pos;
          item.entries.emplace_back(ckey, parse_value(cvalue, cont, indent + 2));
        }
        node.items.push_back(std::move(item));
      } else {
        ++pos;
        ConfigNode item;
        item.kind = ConfigNode::Kind::Scalar;
        item.line = line.number;
        item.scalar = content;
        node.items.push_back(std::move(item));
      }
    }
    if (pos < lines.size() && lines[pos].indent > indent)
      throw ConfigError(loc(lines[pos].number) + "unexpected indentation");
    return node;
  }
};

}  // namespace

std::string ConfigNode::where() const { return loc(line); }

bool ConfigNode::has(const std::string& key) const { return find(key) != nullptr; }

const ConfigNode* ConfigNode::find(const std::string& key) const {
  if (kind != Kind::Map) return nullptr;
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

const ConfigNode& ConfigNode::at(const std::string& key) const {
  if (kind != Kind::Map)
    throw ConfigError(where() + "expected a key-value block with '" + key + ":'");
  const ConfigNode* node = find(key);
  if (node == nullptr) throw ConfigError(where() + "missing key '" + key + "'");
  return *node;
}

const std::string& ConfigNode::as_string() const {
  if (kind != Kind::Scalar)
    throw ConfigError(where() + "expected a single value");
  return scalar;
}

std::int64_t ConfigNode::as_int() const {
  const std::string& s = as_string();
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where() + "expected an integer, got '" + s + "'");
  }
}

std::uint64_t ConfigNode::as_uint64() const {
  const std::string& s = as_string();
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where() + "expected a non-negative integer, got '" + s + "'");
  }
}

double ConfigNode::as_double() const {
  const std::string& s = as_string();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where() + "expected a number, got '" + s + "'");
  }
}

std::vector<std::string> ConfigNode::as_words() const {
  std::istringstream in(as_string());
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<std::string> ConfigNode::as_string_list() const {
  if (kind == Kind::Scalar) return as_words();
  if (kind != Kind::List)
    throw ConfigError(where() + "expected a list or a space-separated value");
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.as_string());
  return out;
}

void ConfigNode::expect_keys(const std::set<std::string>& allowed) const {
  if (kind != Kind::Map)
    throw ConfigError(where() + "expected a key-value block");
  for (const auto& [key, value] : entries)
    if (allowed.count(key) == 0)
      throw ConfigError(loc(value.line) + "unknown key '" + key + "'");
}

ConfigNode parse_config(const std::string& text) {
  const std::vector<Line> lines = significant_lines(text);
  if (lines.empty()) {
    ConfigNode empty;
    empty.kind = ConfigNode::Kind::Map;
    empty.line = 1;
    return empty;
  }
  if (lines.front().indent != 0)
    throw ConfigError(loc(lines.front().number) +
                      "top-level entries must start in column one");
  Parser parser{lines};
  ConfigNode doc = parser.parse_block(0);
  if (parser.pos != lines.size())
    throw ConfigError(loc(lines[parser.pos].number) + "unexpected content");
  return doc;
}

ConfigNode load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Sample: return "sample";
    case RunMode::Exact: return "exact";
    case RunMode::Matrix: return "matrix";
  }
  return "sample";
}

RunMode mode_from_name(const std::string& name) {
  if (name == "sample") return RunMode::Sample;
  if (name == "exact") return RunMode::Exact;
  if (name == "matrix") return RunMode::Matrix;
  throw ConfigError("unknown mode '" + name + "' (sample, exact, matrix)");
}

std::vector<std::pair<std::string, std::string>> parse_postselect(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string clause = trim(text.substr(start, end - start));
    start = end + 1;
    if (clause.empty()) {
      if (start > text.size()) break;
      throw ConfigError("empty clause in post-selection '" + text + "'");
    }
    const std::size_t eq = clause.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == clause.size())
      throw ConfigError("post-selection clause '" + clause +
                        "' is not of the form var=value");
    out.emplace_back(trim(clause.substr(0, eq)), trim(clause.substr(eq + 1)));
  }
  return out;
}

namespace {

Policy policy_from_node(const ConfigNode& doc) {
  std::set<std::string> classical;
  if (const ConfigNode* c = doc.find("classical"))
    for (const auto& r : c->as_string_list()) classical.insert(r);

  const ConfigNode& p = doc.at("policy");
  try {
    if (p.kind == ConfigNode::Kind::Scalar)
      return named_policy(p.as_string(), std::move(classical));
    p.expect_keys({"name", "classical"});
    if (const ConfigNode* c = p.find("classical")) {
      classical.clear();
      for (const auto& r : c->as_string_list()) classical.insert(r);
    }
    return named_policy(p.at("name").as_string(), std::move(classical));
  } catch (const InvalidSpec& e) {
    throw ConfigError(p.where() + e.what());
  }
}

}  // namespace

RunConfig run_config_from(const ConfigNode& doc) {
  doc.expect_keys({"experiment", "script", "policy", "classical", "runs", "seed",
                   "postselect", "mode", "out"});
  RunConfig config;
  if (const ConfigNode* e = doc.find("experiment"))
    config.experiment = e->as_string();
  if (config.experiment != "wigner" && config.experiment != "deutsch" &&
      config.experiment != "fr" && config.experiment != "custom")
    throw ConfigError(doc.at("experiment").where() + "unknown experiment '" +
                      config.experiment + "' (wigner, deutsch, fr, custom)");
  if (const ConfigNode* s = doc.find("script")) {
    if (config.experiment != "custom")
      throw ConfigError(s->where() +
                        "'script' is only valid with experiment: custom");
    config.script_path = s->as_string();
  } else if (config.experiment == "custom") {
    throw ConfigError(doc.where() +
                      "experiment 'custom' needs 'script: <path>'");
  }
  if (doc.has("policy")) config.policy = policy_from_node(doc);
  if (const ConfigNode* r = doc.find("runs")) {
    config.runs = r->as_uint64();
    if (config.runs < 1) throw ConfigError(r->where() + "runs must be >= 1");
  }
  if (const ConfigNode* s = doc.find("seed")) config.seed = s->as_uint64();
  if (const ConfigNode* p = doc.find("postselect")) {
    try {
      config.postselect = parse_postselect(p->as_string());
    } catch (const ConfigError& e) {
      throw ConfigError(p->where() + e.what());
    }
  }
  if (const ConfigNode* m = doc.find("mode")) {
    try {
      config.mode = mode_from_name(m->as_string());
    } catch (const ConfigError& e) {
      throw ConfigError(m->where() + e.what());
    }
  }
  if (const ConfigNode* o = doc.find("out")) config.out_path = o->as_string();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from(load_config_file(path));
}

// Experiment documents -------------------------------------------------------

namespace {

std::vector<cplx> parse_amplitudes(const ConfigNode& node) {
  std::vector<cplx> amps;
  for (const auto& token : node.as_words()) {
    const std::size_t comma = token.find(',');
    try {
      if (comma == std::string::npos) {
        amps.emplace_back(std::stod(token), 0.0);
      } else {
        amps.emplace_back(std::stod(token.substr(0, comma)),
                          std::stod(token.substr(comma + 1)));
      }
    } catch (const std::exception&) {
      throw ConfigError(node.where() + "bad amplitude '" + token +
                        "' (use re or re,im)");
    }
  }
  return amps;
}

Matrix hadamard2() {
  const double h = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m.at(0, 0) = h;
  m.at(0, 1) = h;
  m.at(1, 0) = h;
  m.at(1, 1) = -h;
  return m;
}

Matrix pauli_x2() {
  Matrix m(2, 2);
  m.at(0, 1) = 1.0;
  m.at(1, 0) = 1.0;
  return m;
}

const RegisterSpec& reg_named(const std::vector<RegisterSpec>& regs,
                              const std::string& name, const ConfigNode& at) {
  for (const auto& r : regs)
    if (r.name == name) return r;
  throw ConfigError(at.where() + "unknown register '" + name + "'");
}

// Gate grammar: "hadamard R" | "x R" | "controlled C i hadamard R" |
// "controlled C i x R".
LinearOp parse_gate(const ConfigNode& node,
                    const std::vector<RegisterSpec>& regs) {
  const std::vector<std::string> w = node.as_words();
  const auto single = [&](const std::string& name) -> Matrix {
    if (name == "hadamard") return hadamard2();
    if (name == "x") return pauli_x2();
    throw ConfigError(node.where() + "unknown gate '" + name +
                      "' (hadamard, x, controlled)");
  };
  if (w.size() == 2) {
    const RegisterSpec& target = reg_named(regs, w[1], node);
    if (target.dimension != 2)
      throw ConfigError(node.where() + "gate '" + w[0] +
                        "' needs a dimension-2 register");
    return make_unitary({w[1]}, single(w[0]));
  }
  if (w.size() == 5 && w[0] == "controlled") {
    const RegisterSpec& control = reg_named(regs, w[1], node);
    const RegisterSpec& target = reg_named(regs, w[4], node);
    if (target.dimension != 2)
      throw ConfigError(node.where() + "gate '" + w[3] +
                        "' needs a dimension-2 register");
    std::size_t index = 0;
    try {
      index = static_cast<std::size_t>(std::stoull(w[2]));
    } catch (const std::exception&) {
      index = control.index_of_label(w[2]);
    }
    if (index >= control.dimension)
      throw ConfigError(node.where() + "control index " + w[2] +
                        " out of range for " + control.name);
    return controlled(control.name, control.dimension, {target.name},
                      target.dimension, {{index, single(w[3])}});
  }
  throw ConfigError(node.where() +
                    "bad gate (hadamard R | x R | controlled C i hadamard R)");
}

const FriendMeasurement& fm_named(const std::vector<FriendMeasurement>& fms,
                                  const std::string& variable,
                                  const ConfigNode& at) {
  for (const auto& fm : fms)
    if (fm.variable == variable) return fm;
  throw ConfigError(at.where() + "no measurement declared for variable '" +
                    variable + "'");
}

// Basis grammar: "ok-fail a" (over measurement a's lab) |
// "plus-minus R [label0 label1]".
MeasurementSpec parse_basis(const ConfigNode& node,
                            const std::vector<FriendMeasurement>& fms,
                            const std::vector<RegisterSpec>& regs) {
  const std::vector<std::string> w = node.as_words();
  if (w.size() == 2 && w[0] == "ok-fail")
    return build_ok_fail(fm_named(fms, w[1], node), regs);
  if ((w.size() == 2 || w.size() == 4) && w[0] == "plus-minus") {
    const RegisterSpec& reg = reg_named(regs, w[1], node);
    if (reg.dimension != 2)
      throw ConfigError(node.where() +
                        "plus-minus needs a dimension-2 register");
    const double h = 1.0 / std::sqrt(2.0);
    MeasurementSpec m;
    m.targets = {reg.name};
    m.outcome_labels = {w.size() == 4 ? w[2] : "plus"};
    m.basis = {StateVector::ket(reg, {h, h})};
    m.complete_with_other = true;
    m.other_label = w.size() == 4 ? w[3] : "minus";
    m.validate();
    return m;
  }
  throw ConfigError(node.where() +
                    "bad basis (ok-fail <variable> | plus-minus R [l0 l1])");
}

// Infer verb grammar, one scalar per step:
//   observe VAR
//   chain TARGET given C1[,C2...] [via AGENT] [announce]
//   adopt
InferStep parse_infer_verb(const ConfigNode& node, const std::string& agent,
                           int time) {
  const std::vector<std::string> w = node.as_words();
  InferStep step;
  step.agent = agent;
  step.time = time;
  if (w.size() == 2 && w[0] == "observe") {
    step.kind = InferStep::Kind::Observe;
    step.variable = w[1];
    return step;
  }
  if (w.size() == 1 && w[0] == "adopt") {
    step.kind = InferStep::Kind::AdoptAnnounced;
    return step;
  }
  if (w.size() >= 4 && w[0] == "chain" && w[2] == "given") {
    step.kind = InferStep::Kind::QChain;
    step.q_target = w[1];
    std::string conds = w[3];
    std::size_t i = 4;
    while (i < w.size() && w[i] != "via" && w[i] != "announce")
      conds += w[i++];
    std::size_t start = 0;
    while (start <= conds.size()) {
      std::size_t end = conds.find(',', start);
      if (end == std::string::npos) end = conds.size();
      const std::string var = trim(conds.substr(start, end - start));
      if (!var.empty()) step.conditioning.push_back(var);
      start = end + 1;
    }
    if (i + 1 < w.size() && w[i] == "via") {
      step.chain_via = w[i + 1];
      i += 2;
    }
    if (i < w.size() && w[i] == "announce") {
      step.announce = true;
      ++i;
    }
    if (i != w.size() || step.conditioning.empty())
      throw ConfigError(node.where() + "bad infer step '" + node.as_string() +
                        "'");
    return step;
  }
  throw ConfigError(node.where() + "bad infer step '" + node.as_string() +
                    "' (observe V | chain T given C[,C] [via A] | adopt)");
}

}  // namespace

ExperimentScript script_from_config(const ConfigNode& doc) {
  doc.expect_keys({"name", "registers", "measurements", "initial", "agents",
                   "steps", "compare", "observables"});
  ExperimentScript script;
  script.name = doc.has("name") ? doc.at("name").as_string() : "custom";

  const ConfigNode& regs_node = doc.at("registers");
  if (regs_node.kind != ConfigNode::Kind::List)
    throw ConfigError(regs_node.where() + "registers must be a list");
  for (const auto& r : regs_node.items) {
    r.expect_keys({"name", "dimension", "role", "labels"});
    RegisterSpec reg;
    reg.name = r.at("name").as_string();
    if (r.has("dimension"))
      reg.dimension = static_cast<std::size_t>(r.at("dimension").as_uint64());
    if (r.has("role")) {
      try {
        reg.role = role_from_name(r.at("role").as_string());
      } catch (const InvalidSpec& e) {
        throw ConfigError(r.at("role").where() + e.what());
      }
    }
    if (r.has("labels")) reg.basis_labels = r.at("labels").as_string_list();
    try {
      reg.validate();
    } catch (const Error& e) {
      throw ConfigError(r.where() + e.what());
    }
    script.registers.push_back(std::move(reg));
  }

  std::vector<FriendMeasurement> fms;
  if (const ConfigNode* ms = doc.find("measurements")) {
    if (ms->kind != ConfigNode::Kind::List)
      throw ConfigError(ms->where() + "measurements must be a list");
    for (const auto& m : ms->items) {
      m.expect_keys({"variable", "agent", "observed", "memory", "environment",
                     "labels", "ready", "env-overlap"});
      FriendMeasurement fm;
      fm.variable = m.at("variable").as_string();
      fm.agent = m.at("agent").as_string();
      fm.observed = m.at("observed").as_string();
      fm.memory = m.at("memory").as_string();
      fm.environment = m.at("environment").as_string();
      if (m.has("ready")) fm.ready_label = m.at("ready").as_string();
      if (m.has("env-overlap")) fm.env_overlap = m.at("env-overlap").as_double();
      const RegisterSpec& mem = reg_named(script.registers, fm.memory, m);
      const RegisterSpec& obs = reg_named(script.registers, fm.observed, m);
      if (m.has("labels")) {
        fm.outcome_labels = m.at("labels").as_string_list();
      } else {
        // Default: memory register labels after the ready state.
        if (mem.basis_labels.size() != mem.dimension)
          throw ConfigError(m.where() + "measurement '" + fm.variable +
                            "' needs labels (memory register " + mem.name +
                            " has none)");
        fm.outcome_labels.assign(mem.basis_labels.begin() + 1,
                                 mem.basis_labels.end());
        fm.ready_label = mem.basis_labels.front();
      }
      if (fm.outcome_labels.size() != obs.dimension)
        throw ConfigError(m.where() + "measurement '" + fm.variable + "' has " +
                          std::to_string(fm.outcome_labels.size()) +
                          " labels for " + std::to_string(obs.dimension) +
                          " outcomes");
      fms.push_back(std::move(fm));
    }
  }

  if (const ConfigNode* init = doc.find("initial")) {
    if (init->kind != ConfigNode::Kind::Map)
      throw ConfigError(init->where() + "initial must map registers to amplitudes");
    for (const auto& [name, amps] : init->entries) {
      reg_named(script.registers, name, *init);
      script.initial[name] = parse_amplitudes(amps);
    }
  }

  const ConfigNode& agents_node = doc.at("agents");
  if (agents_node.kind != ConfigNode::Kind::List)
    throw ConfigError(agents_node.where() + "agents must be a list");
  for (const auto& a : agents_node.items) {
    a.expect_keys({"name", "display", "pronoun", "memory", "lab", "classical"});
    Agent agent;
    agent.name = a.at("name").as_string();
    agent.display_name = a.has("display") ? a.at("display").as_string()
                                          : agent.name;
    if (a.has("pronoun")) agent.pronoun = a.at("pronoun").as_string();
    if (a.has("memory")) agent.memory_register = a.at("memory").as_string();
    if (a.has("lab"))
      for (const auto& r : a.at("lab").as_string_list()) {
        reg_named(script.registers, r, a);
        agent.lab_registers.push_back(r);
      }
    if (a.has("classical"))
      agent.classical_variables = a.at("classical").as_string_list();
    script.agents.push_back(std::move(agent));
  }

  const ConfigNode& steps_node = doc.at("steps");
  if (steps_node.kind != ConfigNode::Kind::List)
    throw ConfigError(steps_node.where() + "steps must be a list");
  int auto_op = 0;
  for (const auto& s : steps_node.items) {
    s.expect_keys({"time", "actor", "op", "action", "measure", "gate",
                   "description", "register", "to", "variable", "basis",
                   "hadamards", "notebook", "record-outcome", "infer"});
    ScriptStep step;
    step.time = static_cast<int>(s.at("time").as_int());
    step.actor = s.at("actor").as_string();
    step.op_id = s.has("op") ? s.at("op").as_string()
                             : "OP" + std::to_string(++auto_op);
    const std::string action = s.at("action").as_string();

    if (action == "friend-measure") {
      const FriendMeasurement& fm =
          fm_named(fms, s.at("measure").as_string(), s);
      step.action = FriendMeasureAction{
          fm, build_friend_measurement(fm, script.registers)};
    } else if (action == "prepare") {
      Prepare p;
      p.op = parse_gate(s.at("gate"), script.registers);
      if (s.has("description")) p.description = s.at("description").as_string();
      step.action = std::move(p);
    } else if (action == "send") {
      step.action = SendAction{s.at("register").as_string(), step.actor,
                               s.at("to").as_string()};
    } else if (action == "outside-measure") {
      OutsideMeasureAction o;
      o.variable = s.at("variable").as_string();
      o.spec = parse_basis(s.at("basis"), fms, script.registers);
      if (s.has("hadamards"))
        o.hadamarded_agents = s.at("hadamards").as_string_list();
      step.action = std::move(o);
    } else if (action == "undo") {
      const FriendMeasurement& fm =
          fm_named(fms, s.at("measure").as_string(), s);
      step.action = UndoAction{build_undo(fm, script.registers), fm.agent};
    } else if (action == "notebook-write") {
      const FriendMeasurement& fm =
          fm_named(fms, s.at("measure").as_string(), s);
      const RegisterSpec& notebook =
          reg_named(script.registers, s.at("notebook").as_string(), s);
      bool record = false;
      if (s.has("record-outcome")) {
        const std::string& v = s.at("record-outcome").as_string();
        if (v != "true" && v != "false")
          throw ConfigError(s.at("record-outcome").where() +
                            "expected true or false");
        record = v == "true";
      }
      step.action = NotebookWriteAction{
          build_notebook_write(fm, notebook, script.registers, record)};
    } else if (action == "infer") {
      InferAction inf;
      const ConfigNode& verbs = s.at("infer");
      if (verbs.kind != ConfigNode::Kind::List)
        throw ConfigError(verbs.where() + "infer must be a list of steps");
      for (const auto& v : verbs.items)
        inf.steps.push_back(parse_infer_verb(v, step.actor, step.time));
      step.action = std::move(inf);
    } else if (action == "announce") {
      step.action = AnnounceAction{step.actor, s.at("to").as_string(),
                                   s.at("variable").as_string()};
    } else if (action == "compare") {
      step.action = CompareAction{step.actor, s.at("variable").as_string()};
    } else {
      throw ConfigError(s.at("action").where() + "unknown action '" + action +
                        "'");
    }
    script.steps.push_back(std::move(step));
  }

  if (doc.has("compare"))
    script.comparison_variable = doc.at("compare").as_string();
  if (doc.has("observables"))
    script.observables = doc.at("observables").as_string_list();

  try {
    validate_script(script);
  } catch (const Error& e) {
    throw ConfigError(doc.where() + std::string("invalid experiment: ") +
                      e.what());
  }
  return script;
}

ExperimentScript load_script(const std::string& path) {
  return script_from_config(load_config_file(path));
}

ExperimentScript resolve_experiment(const RunConfig& config) {
  if (config.experiment == "wigner") return script_wigner();
  if (config.experiment == "deutsch") return script_deutsch();
  if (config.experiment == "fr") return script_fr();
  return load_script(config.script_path);
}

}  // namespace friendsim
