#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "friendsim/policies.hpp"
#include "friendsim/protocols.hpp"

namespace friendsim {

// Line-oriented nested key-value document; grammar in docs/config-format.md.
//   key: value          scalar entry
//   key:                block entry, children indented two more spaces
//   - value             list item (scalar)
//   - key: value        list item opening a map; further keys align under it
// Full-line comments start with '#', blank lines are skipped, indentation is
// two spaces per level, tabs are rejected.
struct ConfigNode {
  enum class Kind { Scalar, Map, List };
  Kind kind = Kind::Scalar;
  int line = 0;  // 1-based source line introducing this node
  std::string scalar;
  std::vector<std::pair<std::string, ConfigNode>> entries;  // map, file order
  std::vector<ConfigNode> items;                            // list

  bool has(const std::string& key) const;
  const ConfigNode* find(const std::string& key) const;
  const ConfigNode& at(const std::string& key) const;  // ConfigError if absent
  const std::string& as_string() const;
  std::int64_t as_int() const;
  std::uint64_t as_uint64() const;
  double as_double() const;
  std::vector<std::string> as_words() const;  // scalar split on spaces
  // List of scalars, or a single scalar treated as space-separated words.
  std::vector<std::string> as_string_list() const;
  // Map only: reject any entry whose key is not listed.
  void expect_keys(const std::set<std::string>& allowed) const;

  std::string where() const;  // "line N: " prefix for diagnostics
};

ConfigNode parse_config(const std::string& text);
ConfigNode load_config_file(const std::string& path);

enum class RunMode { Sample, Exact, Matrix };

std::string mode_name(RunMode mode);
RunMode mode_from_name(const std::string& name);

// "u=ok, w=ok" -> {{"u","ok"},{"w","ok"}}; used by both config and CLI.
std::vector<std::pair<std::string, std::string>> parse_postselect(
    const std::string& text);

struct RunConfig {
  std::string experiment = "fr";  // wigner | deutsch | fr | custom
  std::string script_path;        // custom experiments only
  Policy policy = policy_unitary();
  std::uint64_t runs = 1;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> postselect;
  RunMode mode = RunMode::Sample;
  std::string out_path;  // report destination, empty for stdout only
};

RunConfig run_config_from(const ConfigNode& doc);
RunConfig load_run_config(const std::string& path);

// Declarative experiment document -> executable script (validated). Grammar
// in docs/config-format.md.
ExperimentScript script_from_config(const ConfigNode& doc);
ExperimentScript load_script(const std::string& path);

// Stock names resolve in code; "custom" loads config.script_path.
ExperimentScript resolve_experiment(const RunConfig& config);

}  // namespace friendsim
