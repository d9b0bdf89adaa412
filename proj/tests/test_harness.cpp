#include "friendsim/harness.hpp"

#include <cmath>
#include <cstdio>

#include "doctest.h"

using namespace friendsim;

namespace {

RunConfig sample_config(const std::string& experiment, std::uint64_t runs,
                        std::uint64_t seed) {
  RunConfig config;
  config.experiment = experiment;
  config.runs = runs;
  config.seed = seed;
  config.mode = RunMode::Sample;
  return config;
}

}  // namespace

TEST_CASE("sampled reports account for every run and every selected run") {
  RunConfig config = sample_config("wigner", 40, 7);
  const Report report = run(config);
  CHECK(report.experiment == "wigner");
  CHECK(report.runs.size() == 40);
  CHECK(report.selected == 40);  // no post-selection
  std::size_t total = 0;
  for (const auto& [label, count] : report.counts.at("a")) total += count;
  CHECK(total == 40);
  CHECK(report.transcripts.size() == kTranscriptCap);
}

TEST_CASE("post-selection keeps matching runs and rejects impossible events") {
  RunConfig config = sample_config("fr", 200, 11);
  config.postselect = {{"u", "ok"}};
  const Report report = run(config);
  CHECK(report.selected > 0);
  CHECK(report.selected < report.runs.size());
  // counts are over selected runs only
  std::size_t total = 0;
  for (const auto& [label, count] : report.counts.at("w")) total += count;
  CHECK(total == report.selected);

  config.postselect = {{"b", "0"}, {"u", "ok"}};
  CHECK_THROWS_AS(run(config), ImpossibleOutcome);

  config.postselect = {{"zz", "ok"}};
  CHECK_THROWS_AS(run(config), ConfigError);
}

TEST_CASE("reports serialise deterministically") {
  RunConfig config = sample_config("fr", 25, 3);
  config.postselect = {{"u", "ok"}};
  const Report a = run(config);
  const Report b = run(config);
  CHECK(report_json(a) == report_json(b));
  CHECK(report_text(a) == report_text(b));
  CHECK(report_json(a).find("friendsim-report/1") != std::string::npos);
  CHECK(report_text(a).find("rng: splitmix64-v1") != std::string::npos);
}

TEST_CASE("reports round-trip through disk") {
  RunConfig config = sample_config("deutsch", 12, 5);
  config.out_path = "/tmp/friendsim-harness-test.json";
  const Report report = run(config);
  write_report(report, config.out_path);
  const Report loaded = load_report(config.out_path);
  CHECK(report_json(loaded) == report_json(report));
  // the side-by-side text summary exists and matches
  std::FILE* txt = std::fopen("/tmp/friendsim-harness-test.json.txt", "rb");
  REQUIRE(txt != nullptr);
  std::fclose(txt);
}

TEST_CASE("replay proves a recorded run and rejects tampering") {
  RunConfig config = sample_config("fr", 10, 21);
  Report report = run(config);
  for (std::uint64_t i = 0; i < report.runs.size(); ++i) {
    const RunTrace trace = replay(report, i);
    CHECK(trace_digest(trace) == report.runs[i].digest);
    CHECK(trace.verdict == report.runs[i].verdict);
  }
  CHECK_THROWS_AS(replay(report, 10), Error);

  report.config.seed = 22;  // forged seed no longer reproduces the digests
  CHECK_THROWS_AS(replay(report, 0), DeterminismError);
}

TEST_CASE("trace digests separate distinct traces") {
  const ExperimentScript script = script_fr();
  const Policy policy = policy_unitary();
  std::map<std::uint64_t, std::uint64_t> digests;
  for (std::uint64_t seed = 0; seed < 32; ++seed)
    digests[trace_digest(execute(script, policy, seed))] += 1;
  CHECK(digests.size() > 1);  // different outcomes hash differently
  // identical traces hash identically
  CHECK(trace_digest(execute(script, policy, 4)) ==
        trace_digest(execute(script, policy, 4)));
}

TEST_CASE("exact mode reports carry the branch table") {
  RunConfig config;
  config.experiment = "fr";
  config.mode = RunMode::Exact;
  const Report report = run(config);
  REQUIRE(report.exact.has_value());
  CHECK(report.exact->branches.size() == 8);
  CHECK(report.runs.empty());
  const std::string text = report_text(report);
  CHECK(text.find("exact branches:") != std::string::npos);
  CHECK(text.find("contradiction probability: 0.083") != std::string::npos);
}

TEST_CASE("matrix mode reports tabulate every stock policy") {
  RunConfig config;
  config.experiment = "deutsch";
  config.mode = RunMode::Matrix;
  const Report report = run(config);
  CHECK(!report.matrix.empty());
  bool saw_disallowed = false;
  for (const MatrixCell& cell : report.matrix)
    if (cell.value == "disallowed") saw_disallowed = true;
  CHECK(saw_disallowed);
  CHECK(report_text(report).find("disallowed") != std::string::npos);
}

TEST_CASE("view diagrams render fixed-width agent views") {
  const ExperimentScript script = script_wigner();
  const CircuitView view = view_diagram(script, "alice");
  const std::string rendered = render_view(view);
  CHECK(rendered ==
        "view: alice\n"
        "R    --[MA]----------\n"
        "A    ==[MA]==(MA.m)==\n"
        "Aenv --[MA]----------\n");
  CHECK_THROWS_AS(view_diagram(script, "nobody"), InvalidSpec);
}

TEST_CASE("sampled frequencies agree with exact probabilities at scale") {
  RunConfig config = sample_config("fr", 20000, 1234);
  const Report report = run(config);
  const auto& ok_count = report.counts.at("u").at("ok");
  const double freq = static_cast<double>(ok_count) / 20000.0;
  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(p * (1 - p) / 20000.0);
  CHECK(std::abs(freq - p) < 4 * sigma);
}
