#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "friendsim/config.hpp"
#include "friendsim/policies.hpp"
#include "friendsim/protocols.hpp"

namespace friendsim {

inline constexpr std::string_view kReportSchema = "friendsim-report/1";

// Post-selected transcripts embedded in a report are capped; the total
// matching count is always recorded.
inline constexpr std::size_t kTranscriptCap = 5;
inline constexpr std::size_t kViolationCap = 10;

// Per-run record. The digest hashes the canonical trace serialisation
// (verdict, recorded values, transcript, struck entries, violation), so a
// replay can prove bit-identity without the report storing every trace.
struct RunSummary {
  Verdict verdict = Verdict::Consistent;
  std::uint64_t digest = 0;
};

struct Report {
  RunConfig config;
  std::string experiment;  // resolved script name

  // Sample mode. Counts and contradictions cover post-selected runs only;
  // `runs` covers every run in index order.
  std::vector<RunSummary> runs;
  std::size_t selected = 0;
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::size_t contradictions = 0;
  std::vector<std::vector<std::string>> transcripts;  // first kTranscriptCap
  std::size_t violations_total = 0;
  std::vector<std::string> violations;  // first kViolationCap, rendered

  // Exact mode.
  std::optional<ExactAnalysis> exact;

  // Matrix mode.
  std::vector<MatrixCell> matrix;
};

// Executes the configured experiment. Sample mode runs `config.runs` traces
// with sub-seed(i) = subseed(config.seed, i); exact mode enumerates branches;
// matrix mode tabulates the experiment under every stock policy. An exactly
// impossible post-selection event raises ImpossibleOutcome.
Report run(const RunConfig& config);

std::uint64_t trace_digest(const RunTrace& trace);

// Machine-readable document (schema kReportSchema) and human-readable
// summary. Both are byte-deterministic given (config, seed, build).
std::string report_json(const Report& report);
std::string report_text(const Report& report);

// Writes `path` (document) and `path`.txt (summary) side by side.
void write_report(const Report& report, const std::string& path);
// Restores config and the full sample block (enough to replay and to
// re-render a sample report byte-identically); exact and matrix blocks are
// render-only and not reconstructed.
Report load_report(const std::string& path);

// Re-executes run `run_index` and proves it reproduces the recorded digest;
// a mismatch (different seed, config, or build) raises DeterminismError.
RunTrace replay(const Report& report, std::uint64_t run_index);

// Fixed-width diagram of one agent's view of the experiment.
CircuitView view_diagram(const ExperimentScript& script, const std::string& agent);

}  // namespace friendsim
