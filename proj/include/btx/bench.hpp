#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "btx/backend.hpp"
#include "btx/resolver.hpp"
#include "btx/sim.hpp"

namespace btx {

struct GoalCase {
  std::string id;
  std::string tier;  // easy | medium | hard
  std::string instruction;
  WorldState initial;
  GoalSpec truth;
};

struct GoalSuite {
  std::filesystem::path source;
  Domain domain;
  std::vector<GoalCase> cases;
};

// {"format": "btx-goals", "version": 1, "domain": "<relative path>",
//  "cases": [{"id", "tier", "instruction", "initial": [atoms], "goal": "<lits>"}]}
GoalSuite load_goal_suite(const std::filesystem::path& path);
void add_goal_knowledge(OracleBackend& oracle, const GoalSuite& suite);
void add_scenario_knowledge(OracleBackend& oracle, const std::vector<Scenario>& scenarios);

// Called once per run; may hand out a shared instance.
using BackendFactory = std::function<std::shared_ptr<Backend>()>;

struct BenchConfig {
  std::size_t repeat = 10;
  std::size_t jobs = 1;
  std::string filter;  // substring of case or scenario ids; empty keeps all
  ResolveConfig resolve;
  bool audit = false;  // keep every exchange in the report
};

struct BenchRow {
  std::string id;
  std::string label;
  std::size_t successes = 0;
  std::size_t trials = 0;
  std::size_t calls = 0;
  double mean_rounds = 0.0;
  std::string detail;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

struct AuditEntry {
  std::string case_id;
  std::size_t trial = 0;
  LlmExchange exchange;
};

struct BenchReport {
  std::string suite;
  std::string backend;
  std::string model;
  std::string timestamp;
  std::vector<BenchRow> rows;     // per difficulty tier or per scenario, sorted
  std::vector<BenchRow> details;  // per goal case; empty for scenario suites
  std::vector<AuditEntry> audit;

  std::size_t successes() const;
  std::size_t trials() const;
};

// Success means the parsed goal equals the ground truth as a set.
BenchReport bench_goals(const GoalSuite& suite, const BackendFactory& make_backend, const BenchConfig& config);
// Precondition suite: success is resolve_until_success reaching Success and
// the final tree replaying to Success without resolution. Parameter suite
// additionally requires the oracle's values on every matching action leaf.
BenchReport bench_scenarios(const std::vector<Scenario>& scenarios, ScenarioKind kind,
                            const BackendFactory& make_backend, const BenchConfig& config);

// Parameter values in `tree` that disagree with the scenario oracle, as text.
std::vector<std::string> parameter_mismatches(const BehaviorTree& tree, const Scenario& scenario);

enum class ReportFormat { Text, Json, Markdown };
std::string render(const BenchReport& report, ReportFormat format);

// Audit record of one pipeline run: goal exchange, resolution records,
// outcome and final tree.
std::string run_json(const RunResult& run, const Scenario& scenario);
std::string records_json(const std::vector<ResolutionRecord>& records);

}  // namespace btx
