#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "btx/bench.hpp"
#include "btx/error.hpp"
#include "btx/resolver.hpp"
#include "btx/tree_io.hpp"
#include "btx/verify.hpp"

namespace fs = std::filesystem;
using namespace btx;

namespace {

enum Exit {
  kOk = 0,
  kError = 1,
  kParse = 3,
  kUnsolvable = 4,
  kExhausted = 5,
  kSchema = 6,
  kBackend = 7,
  kMissingFixture = 8,
  kVerifyFailed = 9,
  kRunFailed = 10,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format:
    case ErrorKind::Parse:
    case ErrorKind::UnknownSymbol:
    case ErrorKind::UnitMismatch:
      return kParse;
    case ErrorKind::Unsolvable: return kUnsolvable;
    case ErrorKind::BudgetExceeded: return kExhausted;
    case ErrorKind::Schema: return kSchema;
    case ErrorKind::BackendUnavailable:
    case ErrorKind::RateLimited:
      return kBackend;
    case ErrorKind::MissingFixture: return kMissingFixture;
    default: return kError;
  }
}

int exit_code(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return kOk;
    case Outcome::Exhausted: return kExhausted;
    case Outcome::Unsolvable: return kUnsolvable;
    case Outcome::Failure: return kRunFailed;
  }
  return kError;
}

struct Options {
  std::string backend = "oracle";
  std::string model;
  std::string data;
  std::string fixtures;
  std::string out;
  std::string format = "text";
  std::size_t jobs = 1;
  std::size_t expansions = PlanConfig{}.max_expansions;
  std::size_t reorders = PlanConfig{}.max_conflict_reorders;
  std::size_t sim_ticks = PlanConfig{}.max_sim_ticks;
  std::size_t rounds = ResolveConfig{}.max_resolution_rounds;
  std::size_t exec_ticks = ExecConfig{}.max_ticks;

  fs::path data_dir() const {
    if (!data.empty()) return data;
    if (const char* env = std::getenv("BTX_DATA")) return env;
    return BTX_DATA_DIR;
  }
  fs::path fixtures_path() const { return fixtures.empty() ? data_dir() / "fixtures" / "scenarios.json" : fs::path(fixtures); }

  ResolveConfig resolve_config() const {
    ResolveConfig c;
    c.plan = {expansions, reorders, sim_ticks};
    c.plan.validate();
    c.exec.max_ticks = exec_ticks;
    c.max_resolution_rounds = rounds;
    c.settings.model = model;
    return c;
  }

  ReportFormat report_format() const {
    if (format == "json") return ReportFormat::Json;
    if (format == "markdown") return ReportFormat::Markdown;
    return ReportFormat::Text;
  }
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--backend", o.backend, "LLM backend")->check(CLI::IsMember({"oracle", "scripted", "remote"}));
  cmd->add_option("--model", o.model, "model name for the remote backend");
  cmd->add_option("--data", o.data, "data directory (domains, scenarios, fixtures, benchmarks)");
  cmd->add_option("--fixtures", o.fixtures, "fixture file for the scripted backend");
  cmd->add_option("--out", o.out, "directory for artifacts");
  cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"text", "json", "markdown"}));
  cmd->add_option("--jobs", o.jobs, "parallel workers")->check(CLI::PositiveNumber);
  cmd->add_option("--budget-expansions", o.expansions, "planner expansion budget");
  cmd->add_option("--budget-reorders", o.reorders, "planner conflict reorder budget");
  cmd->add_option("--budget-sim-ticks", o.sim_ticks, "planner simulation tick budget");
  cmd->add_option("--budget-rounds", o.rounds, "resolution rounds per run");
  cmd->add_option("--budget-exec-ticks", o.exec_ticks, "execution tick budget");
}

std::vector<Scenario> bundled_scenarios(const Options& o) { return load_scenarios(o.data_dir() / "scenarios"); }

Scenario find_scenario(const Options& o, const std::string& ref) {
  if (fs::is_regular_file(ref)) return load_scenario(ref);
  fs::path candidate = o.data_dir() / "scenarios" / (ref + ".json");
  if (fs::is_regular_file(candidate)) return load_scenario(candidate);
  for (auto& s : bundled_scenarios(o))
    if (s.id == ref) return s;
  throw Error(ErrorKind::Schema, "no scenario '" + ref + "' in " + (o.data_dir() / "scenarios").string());
}

BackendFactory make_factory(const Options& o, const std::vector<Scenario>& scenarios, const GoalSuite* goals) {
  if (o.backend == "scripted") {
    auto responses = std::make_shared<const std::map<std::string, std::vector<std::string>>>(load_fixtures(o.fixtures_path()));
    return [responses] { return std::make_shared<ScriptedBackend>(*responses); };
  }
  if (o.backend == "remote") {
    RemoteConfig config = RemoteConfig::from_env();
    if (!o.model.empty()) config.model = o.model;
    auto shared = std::make_shared<RemoteBackend>(config);
    return [shared]() -> std::shared_ptr<Backend> { return shared; };
  }
  auto oracle = std::make_shared<OracleBackend>();
  add_scenario_knowledge(*oracle, scenarios);
  if (goals != nullptr) add_goal_knowledge(*oracle, *goals);
  return [oracle]() -> std::shared_ptr<Backend> { return oracle; };
}

void write_artifact(const Options& o, const std::string& name, const std::string& content) {
  if (o.out.empty()) return;
  fs::create_directories(o.out);
  write_text_atomic(fs::path(o.out) / name, content);
}

void write_tree(const Options& o, const std::string& stem, const BehaviorTree& tree) {
  write_artifact(o, stem + ".json", serialize_tree(tree));
  write_artifact(o, stem + ".dot", to_dot(tree, stem));
}

std::set<Atom> atoms_from_text(const std::string& text, const Domain& domain) {
  std::set<Atom> out;
  if (text.empty()) return out;
  for (const auto& lit : parse_precondition_response("ANSWER: " + text, domain).preconditions) out.insert(to_atom(lit));
  return out;
}

// --- plan ---------------------------------------------------------------

struct PlanArgs {
  std::string instruction;
  std::string scenario;
  std::string domain;
  std::vector<std::string> objects;
  std::string initial;
};

int cmd_plan(const Options& o, const PlanArgs& a) {
  std::optional<Scenario> sc;
  Domain domain;
  WorldState initial;
  std::string instruction = a.instruction;
  std::string key = "plan";
  ActionModel model;
  if (!a.scenario.empty()) {
    sc = find_scenario(o, a.scenario);
    domain = sc->domain;
    initial = sc->initial;
    key = sc->id;
    model = sc->planning_model();
    if (instruction.empty()) instruction = sc->instruction;
  } else {
    if (a.domain.empty()) throw Error(ErrorKind::Schema, "plan needs --scenario or --domain");
    domain = load_domain(a.domain);
    if (!a.objects.empty()) domain = domain.restricted_to(a.objects);
    initial = WorldState(atoms_from_text(a.initial, domain));
  }
  if (instruction.empty()) throw Error(ErrorKind::Schema, "plan needs an instruction");

  std::vector<Scenario> known;
  if (sc) known.push_back(*sc);
  auto backend = make_factory(o, known, nullptr)();
  ResolveConfig config = o.resolve_config();

  LlmExchange ex;
  ex.prompt = goal_prompt(domain, initial, instruction);
  ex.prompt_text = build_prompt(ex.prompt);
  ex.raw_response = backend->complete({ex.prompt_text, PromptRole::GoalInterpretation, key, "", std::nullopt, ""},
                                      config.settings);
  GoalResponse goals = parse_goal_response(ex.raw_response, domain);
  PlanOutcome planned = continue_plan(init_tree(goals.goals), domain, initial, config.plan, model);
  if (sc) apply_settings(planned.tree, domain, sc->presets);

  write_tree(o, "tree", planned.tree);
  std::string reasoning = "goal: " + to_string(goals.goals) + "\n";
  if (goals.reasoning) reasoning += "reasoning: " + *goals.reasoning + "\n";
  if (planned.failure)
    reasoning += "planning failure: " + to_string(planned.failure->action) + ": " + planned.failure->message + "\n";
  write_artifact(o, "reasoning.txt", reasoning);
  write_artifact(o, "prompt.txt", ex.prompt_text);

  if (o.format == "json") std::cout << serialize_tree(planned.tree);
  else std::cout << reasoning << to_dot(planned.tree, "plan");
  return kOk;
}

// --- run ----------------------------------------------------------------

int cmd_run(const Options& o, const std::string& ref, std::size_t repeat, bool no_resolve) {
  Scenario sc = find_scenario(o, ref);
  auto factory = make_factory(o, {sc}, nullptr);
  ResolveConfig config = o.resolve_config();
  config.resolve = !no_resolve;

  std::optional<RunResult> first;
  bool identical = true;
  for (std::size_t i = 0; i < std::max<std::size_t>(repeat, 1); ++i) {
    auto backend = factory();
    RunResult run = resolve_until_success(sc, *backend, config);
    if (o.format == "text") {
      std::cout << sc.id << " run " << (i + 1) << ": " << to_string(run.outcome) << ", "
                << run.records.size() << " round(s), " << run.backend_calls << " backend call(s)";
      if (run.outcome != Outcome::Success) std::cout << ": " << run.message;
      std::cout << "\n";
    }
    if (!first) {
      first = std::move(run);
    } else if (run.outcome != first->outcome || run.records.size() != first->records.size() ||
               (run.tree && first->tree && !(*run.tree == *first->tree))) {
      identical = false;
    }
  }

  const RunResult& run = *first;
  if (o.format == "json") std::cout << run_json(run, sc);
  if (o.format == "markdown")
    std::cout << "| Scenario | Outcome | Rounds | Calls |\n| --- | --- | ---: | ---: |\n| " << sc.id << " | "
              << to_string(run.outcome) << " | " << run.records.size() << " | " << run.backend_calls << " |\n";
  if (repeat > 1 && o.format == "text")
    std::cout << (identical ? "all runs identical" : "runs differ") << "\n";

  write_artifact(o, "run.json", run_json(run, sc));
  write_artifact(o, "records.json", records_json(run.records));
  std::string traces;
  for (const auto& t : run.traces) traces += trace_jsonl(t);
  write_artifact(o, "trace.jsonl", traces);
  if (run.planned) write_tree(o, "planned", *run.planned);
  if (run.tree) write_tree(o, "final", *run.tree);
  return exit_code(run.outcome);
}

// --- bench --------------------------------------------------------------

int cmd_bench(const Options& o, const std::string& suite, std::size_t repeat, const std::string& filter) {
  BenchConfig config;
  config.repeat = repeat;
  config.jobs = o.jobs;
  config.filter = filter;
  config.resolve = o.resolve_config();
  config.audit = o.backend == "remote";

  BenchReport report;
  if (suite == "goals") {
    GoalSuite goals = load_goal_suite(o.data_dir() / "benchmarks" / "goals.json");
    report = bench_goals(goals, make_factory(o, {}, &goals), config);
  } else {
    auto scenarios = bundled_scenarios(o);
    ScenarioKind kind = suite == "params" ? ScenarioKind::Parameter : ScenarioKind::Precondition;
    report = bench_scenarios(scenarios, kind, make_factory(o, scenarios, nullptr), config);
  }
  report.backend = o.backend;
  if (report.model.empty() && o.backend == "remote") report.model = RemoteConfig::from_env().model;

  std::string text = render(report, o.report_format());
  std::cout << text;
  const char* ext = o.format == "json" ? ".json" : o.format == "markdown" ? ".md" : ".txt";
  write_artifact(o, suite + ext, text);
  if (config.audit && o.format != "json") write_artifact(o, suite + "_audit.json", render(report, ReportFormat::Json));
  return kOk;
}

// --- verify -------------------------------------------------------------

int cmd_verify(const Options& o, const std::string& tree_path, const std::string& domain_path,
               const std::string& scenario_ref, const std::string& goal_text) {
  BehaviorTree tree = load_tree(tree_path);
  Domain domain;
  VerifyConfig config;
  config.max_sim_ticks = o.sim_ticks;
  std::optional<GoalSpec> goals;
  if (!scenario_ref.empty()) {
    Scenario sc = find_scenario(o, scenario_ref);
    domain = sc.domain;
    config.seeds.push_back(sc.initial.visible_only());
    goals = parse_goal_response("ANSWER: " + sc.oracle.goal, domain).goals;
  } else if (!domain_path.empty()) {
    domain = load_domain(domain_path);
  } else {
    throw Error(ErrorKind::Schema, "verify needs --domain or --scenario");
  }
  if (!goal_text.empty()) goals = parse_goal_response("ANSWER: " + goal_text, domain).goals;

  VerificationReport report = verify_tree(tree, domain, goals, config);
  std::string text = o.format == "json" ? report_json(report) : report_text(report);
  std::cout << text;
  write_artifact(o, o.format == "json" ? "verify.json" : "verify.txt", text);
  return report.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior tree task planning with LLM-assisted failure resolution"};
  app.require_subcommand(1);
  Options opt;

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "interpret an instruction and plan a behavior tree");
  add_common(plan, opt);
  plan->add_option("instruction", plan_args.instruction, "instruction text");
  plan->add_option("--scenario", plan_args.scenario, "scenario id or file supplying domain and state");
  plan->add_option("--domain", plan_args.domain, "domain file");
  plan->add_option("--objects", plan_args.objects, "restrict the domain to these objects")->delimiter(',');
  plan->add_option("--initial", plan_args.initial, "initial state as 'lit & lit'");

  std::string run_ref;
  std::size_t run_repeat = 1;
  bool no_resolve = false;
  auto* run = app.add_subcommand("run", "run a scenario through planning, execution and failure resolution");
  add_common(run, opt);
  run->add_option("scenario", run_ref, "scenario id or file")->required();
  run->add_option("--repeat", run_repeat, "number of runs")->check(CLI::PositiveNumber);
  run->add_flag("--no-resolve", no_resolve, "report the first failure instead of resolving it");

  std::string suite;
  std::size_t bench_repeat = 10;
  std::string filter;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  add_common(bench, opt);
  bench->add_option("suite", suite, "goals, preconds or params")->required()->check(CLI::IsMember({"goals", "preconds", "params"}));
  bench->add_option("--repeat", bench_repeat, "repeats per case")->check(CLI::PositiveNumber);
  bench->add_option("--filter", filter, "keep cases whose id contains this text");

  std::string tree_path, domain_path, verify_scenario, goal_text;
  auto* verify = app.add_subcommand("verify", "check a behavior tree file");
  add_common(verify, opt);
  verify->add_option("tree", tree_path, "tree file")->required();
  verify->add_option("--domain", domain_path, "domain file");
  verify->add_option("--scenario", verify_scenario, "scenario id or file (domain, goal and seed state)");
  verify->add_option("--goal", goal_text, "goal conjunction to check for");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return cmd_plan(opt, plan_args);
    if (*run) return cmd_run(opt, run_ref, run_repeat, no_resolve);
    if (*bench) return cmd_bench(opt, suite, bench_repeat, filter);
    if (*verify) return cmd_verify(opt, tree_path, domain_path, verify_scenario, goal_text);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
