#include "btx/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "btx/error.hpp"
#include "codec.hpp"
#include "json_util.hpp"

namespace btx {

using detail::Json;
using detail::JsonDoc;

GoalSuite load_goal_suite(const std::filesystem::path& path) {
  JsonDoc doc(detail::read_file(path), path.string(), ErrorKind::Schema);
  doc.expect_format("btx-goals", 1);
  const Json& root = doc.root();
  GoalSuite suite{path, load_domain((path.parent_path() / doc.string_member(root, "domain")).lexically_normal()), {}};
  std::set<std::string> ids;
  for (const auto& c : doc.array_member(root, "cases")) {
    doc.expect_object(c, "a case");
    std::string id = doc.string_member(c, "id");
    if (!ids.insert(id).second) doc.fail(c, "duplicate case id '" + id + "'");
    std::string tier = doc.string_member(c, "tier");
    std::string instruction = doc.string_member(c, "instruction");
    std::set<Atom> initial;
    if (const Json* list = doc.optional_member(c, "initial")) initial = detail::atoms_from(doc, c, *list);
    for (const auto& a : initial) {
      try {
        suite.domain.validate_literal(to_literal(a));
      } catch (const Error& e) {
        doc.fail(c, e.what());
      }
    }
    std::string goal = doc.string_member(c, "goal");
    std::optional<GoalSpec> truth;
    try {
      truth = parse_goal_response("ANSWER: " + goal, suite.domain).goals;
    } catch (const Error& e) {
      doc.fail(c, "goal '" + goal + "': " + e.what());
    }
    suite.cases.push_back({id, tier, instruction, WorldState(initial), *truth});
  }
  return suite;
}

void add_goal_knowledge(OracleBackend& oracle, const GoalSuite& suite) {
  for (const auto& c : suite.cases) oracle.add(c.id, {to_string(c.truth), {}, {}});
}

void add_scenario_knowledge(OracleBackend& oracle, const std::vector<Scenario>& scenarios) {
  for (const auto& s : scenarios) oracle.add(s.id, s.knowledge());
}

std::size_t BenchReport::successes() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.successes;
  return n;
}

std::size_t BenchReport::trials() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.trials;
  return n;
}

namespace {

// Runs task(0..n-1) on up to `jobs` threads. The first exception stops
// the remaining tasks and is rethrown here.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string now_utc() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

bool same_goal_set(const GoalSpec& a, const GoalSpec& b) {
  std::set<Literal> x(a.conjuncts().begin(), a.conjuncts().end());
  std::set<Literal> y(b.conjuncts().begin(), b.conjuncts().end());
  return x == y;
}

bool matches_filter(const std::string& id, const std::string& filter) {
  return filter.empty() || id.find(filter) != std::string::npos;
}

int tier_rank(const std::string& tier) {
  if (tier == "easy") return 0;
  if (tier == "medium") return 1;
  if (tier == "hard") return 2;
  return 3;
}

}  // namespace

BenchReport bench_goals(const GoalSuite& suite, const BackendFactory& make_backend, const BenchConfig& config) {
  BenchReport report;
  report.suite = "goals";
  report.model = config.resolve.settings.model;
  report.timestamp = now_utc();

  std::vector<const GoalCase*> cases;
  for (const auto& c : suite.cases)
    if (matches_filter(c.id, config.filter)) cases.push_back(&c);
  const std::size_t repeat = std::max<std::size_t>(config.repeat, 1);

  struct Trial {
    bool ok = false;
    std::size_t calls = 0;
    LlmExchange exchange;
  };
  std::vector<Trial> trials(cases.size() * repeat);
  parallel_for(trials.size(), config.jobs, [&](std::size_t i) {
    const GoalCase& c = *cases[i / repeat];
    Trial& t = trials[i];
    auto backend = make_backend();
    CountingBackend counter(*backend);
    t.exchange.prompt = goal_prompt(suite.domain, c.initial, c.instruction);
    t.exchange.prompt_text = build_prompt(t.exchange.prompt);
    try {
      t.exchange.raw_response = counter.complete(
          {t.exchange.prompt_text, PromptRole::GoalInterpretation, c.id, "", std::nullopt, ""},
          config.resolve.settings);
      GoalResponse r = parse_goal_response(t.exchange.raw_response, suite.domain);
      t.exchange.parsed = r.goals;
      t.exchange.reasoning = r.reasoning;
      t.ok = same_goal_set(r.goals, c.truth);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BackendUnavailable) throw;
      t.exchange.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    t.calls = counter.calls();
  });

  std::map<std::pair<int, std::string>, BenchRow> tiers;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const GoalCase& c = *cases[ci];
    BenchRow detail{c.id, c.instruction, 0, 0, 0, 0.0, ""};
    for (std::size_t r = 0; r < repeat; ++r) {
      const Trial& t = trials[ci * repeat + r];
      detail.trials++;
      detail.calls += t.calls;
      if (t.ok) detail.successes++;
      if (detail.detail.empty()) {
        if (t.exchange.error) detail.detail = *t.exchange.error;
        else if (auto* g = std::get_if<GoalSpec>(&t.exchange.parsed)) detail.detail = to_string(*g);
      }
      if (config.audit) report.audit.push_back({c.id, r, t.exchange});
    }
    BenchRow& row = tiers[{tier_rank(c.tier), c.tier}];
    row.id = row.label = c.tier;
    row.successes += detail.successes;
    row.trials += detail.trials;
    row.calls += detail.calls;
    report.details.push_back(std::move(detail));
  }
  for (auto& [key, row] : tiers) report.rows.push_back(std::move(row));
  return report;
}

std::vector<std::string> parameter_mismatches(const BehaviorTree& tree, const Scenario& scenario) {
  std::vector<std::string> out;
  for (const auto& p : scenario.oracle.parameters) {
    std::size_t relevant = 0;
    for (NodeId id : tree.preorder()) {
      const TreeNode* n = tree.find(id);
      if (n->kind != NodeKind::Action) continue;
      const SkillTemplate* skill = scenario.domain.skill(n->action->skill);
      const ParamDecl* decl = skill == nullptr ? nullptr : skill->param(p.slot);
      if (decl == nullptr || decl->kind == SlotKind::Object) continue;
      auto objects = n->action->objects();
      if (!p.object.empty() && std::find(objects.begin(), objects.end(), p.object) == objects.end()) continue;
      ++relevant;
      std::string expected = to_string(parse_param_response("ANSWER: " + p.value, *decl).value.value);
      const SlotValue* bound = n->action->get(p.slot);
      if (bound == nullptr)
        out.push_back(to_string(*n->action) + ": " + p.slot + " unbound, expected " + expected);
      else if (to_string(*bound) != expected)
        out.push_back(to_string(*n->action) + ": " + p.slot + " = " + to_string(*bound) + ", expected " + expected);
    }
    if (relevant == 0) out.push_back("no action leaf with " + p.slot + " for " + p.object);
  }
  return out;
}

BenchReport bench_scenarios(const std::vector<Scenario>& scenarios, ScenarioKind kind,
                            const BackendFactory& make_backend, const BenchConfig& config) {
  BenchReport report;
  report.suite = kind == ScenarioKind::Parameter ? "params" : "preconds";
  report.model = config.resolve.settings.model;
  report.timestamp = now_utc();

  std::vector<const Scenario*> selected;
  for (const auto& s : scenarios)
    if (s.kind == kind && matches_filter(s.id, config.filter)) selected.push_back(&s);
  std::sort(selected.begin(), selected.end(), [](const Scenario* a, const Scenario* b) { return a->id < b->id; });
  const std::size_t repeat = std::max<std::size_t>(config.repeat, 1);

  struct Trial {
    bool ok = false;
    std::size_t rounds = 0;
    std::size_t calls = 0;
    std::string note;
    std::vector<AuditEntry> audit;
  };
  std::vector<Trial> trials(selected.size() * repeat);
  parallel_for(trials.size(), config.jobs, [&](std::size_t i) {
    const Scenario& s = *selected[i / repeat];
    Trial& t = trials[i];
    auto backend = make_backend();
    CountingBackend counter(*backend);
    try {
      RunResult run = resolve_until_success(s, counter, config.resolve);
      t.rounds = run.records.size();
      t.note = std::string(to_string(run.outcome)) + ": " + run.message;
      if (config.audit) {
        if (run.goal_exchange) t.audit.push_back({s.id, i % repeat, *run.goal_exchange});
        for (const auto& r : run.records) t.audit.push_back({s.id, i % repeat, r.exchange});
      }
      if (run.outcome == Outcome::Success && run.tree) {
        RunResult again = replay(*run.tree, s, config.resolve);
        t.ok = again.outcome == Outcome::Success;
        if (!t.ok) t.note = "replay " + std::string(to_string(again.outcome)) + ": " + again.message;
        if (t.ok && kind == ScenarioKind::Parameter) {
          auto wrong = parameter_mismatches(*run.tree, s);
          if (!wrong.empty()) {
            t.ok = false;
            t.note = wrong.front();
          }
        }
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BackendUnavailable) throw;
      t.note = std::string(to_string(e.kind())) + ": " + e.what();
    }
    t.calls = counter.calls();
  });

  for (std::size_t si = 0; si < selected.size(); ++si) {
    BenchRow row{selected[si]->id, selected[si]->title, 0, 0, 0, 0.0, ""};
    std::size_t rounds = 0;
    for (std::size_t r = 0; r < repeat; ++r) {
      Trial& t = trials[si * repeat + r];
      row.trials++;
      row.calls += t.calls;
      rounds += t.rounds;
      if (t.ok) row.successes++;
      else if (row.detail.empty()) row.detail = t.note;
      for (auto& a : t.audit) report.audit.push_back(std::move(a));
    }
    row.mean_rounds = static_cast<double>(rounds) / static_cast<double>(repeat);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string percent(double rate) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << rate * 100.0;
  return os.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

Json exchange_json(const LlmExchange& e) {
  Json j;
  j["role"] = to_string(e.prompt.role);
  j["prompt"] = e.prompt_text;
  j["response"] = e.raw_response;
  if (e.reasoning) j["reasoning"] = *e.reasoning;
  if (e.error) j["error"] = *e.error;
  return j;
}

std::string header(const BenchReport& report) {
  std::string h = "suite " + report.suite;
  if (!report.backend.empty()) h += ", backend " + report.backend;
  if (!report.model.empty()) h += ", model " + report.model;
  return h + ", " + report.timestamp;
}

}  // namespace

std::string render(const BenchReport& report, ReportFormat format) {
  const bool goals = report.suite == "goals";
  if (format == ReportFormat::Json) {
    Json j;
    j["suite"] = report.suite;
    j["backend"] = report.backend;
    j["model"] = report.model;
    j["timestamp"] = report.timestamp;
    j["successes"] = report.successes();
    j["trials"] = report.trials();
    auto rows = [](const std::vector<BenchRow>& list) {
      Json out = Json::array();
      for (const auto& r : list)
        out.push_back({{"id", r.id}, {"label", r.label}, {"successes", r.successes}, {"trials", r.trials},
                       {"calls", r.calls}, {"mean_rounds", r.mean_rounds}, {"detail", r.detail}});
      return out;
    };
    j["rows"] = rows(report.rows);
    if (!report.details.empty()) j["cases"] = rows(report.details);
    if (!report.audit.empty()) {
      j["audit"] = Json::array();
      for (const auto& a : report.audit) {
        Json e = exchange_json(a.exchange);
        e["case"] = a.case_id;
        e["trial"] = a.trial;
        j["audit"].push_back(std::move(e));
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> table;
  if (goals) table.push_back({"Difficulty", "Accuracy (%)", "Correct", "Calls"});
  else table.push_back({"Scenario", "Success", "Rate (%)", "Rounds", "Calls", "Note"});
  for (const auto& r : report.rows) {
    std::string frac = std::to_string(r.successes) + "/" + std::to_string(r.trials);
    if (goals) table.push_back({r.label, percent(r.rate()), frac, std::to_string(r.calls)});
    else table.push_back({r.id, frac, percent(r.rate()), fixed(r.mean_rounds, 1), std::to_string(r.calls), r.detail});
  }
  std::string total_frac = std::to_string(report.successes()) + "/" + std::to_string(report.trials());
  double total_rate = report.trials() == 0 ? 0.0 : static_cast<double>(report.successes()) / report.trials();
  if (!report.rows.empty()) {
    if (goals) table.push_back({"total", percent(total_rate), total_frac, ""});
    else table.push_back({"total", total_frac, percent(total_rate), "", "", ""});
  }

  std::ostringstream os;
  if (format == ReportFormat::Markdown) {
    os << "**" << header(report) << "**\n\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
      os << "|";
      for (const auto& cell : table[i]) os << " " << cell << " |";
      os << "\n";
      if (i == 0) {
        os << "|";
        for (std::size_t c = 0; c < table[i].size(); ++c) os << (c == 0 ? " --- |" : " ---: |");
        os << "\n";
      }
    }
    return os.str();
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  os << header(report) << "\n";
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  }
  return os.str();
}

namespace {

Json record_json(const ResolutionRecord& r) {
  Json j;
  j["round"] = r.round;
  j["phase"] = to_string(r.event.phase);
  j["action_id"] = r.event.action_id;
  j["action"] = to_string(r.event.action);
  j["error_message"] = r.event.error_message;
  if (r.event.missing_slot) j["missing_slot"] = *r.event.missing_slot;
  j["world"] = detail::to_json(r.event.world_snapshot.visible());
  j["exchange"] = exchange_json(r.exchange);
  j["inserted"] = Json::array();
  for (const auto& i : r.inserted) j["inserted"].push_back(to_string(i));
  j["targets"] = r.targets;
  j["tree_before"] = r.tree_before;
  j["tree_after"] = r.tree_after;
  if (r.error) j["error"] = *r.error;
  return j;
}

}  // namespace

std::string records_json(const std::vector<ResolutionRecord>& records) {
  Json j = Json::array();
  for (const auto& r : records) j.push_back(record_json(r));
  return j.dump(2) + "\n";
}

std::string run_json(const RunResult& run, const Scenario& scenario) {
  Json j;
  j["scenario"] = scenario.id;
  j["instruction"] = scenario.instruction;
  j["outcome"] = to_string(run.outcome);
  j["message"] = run.message;
  if (run.goals) j["goals"] = to_string(*run.goals);
  if (run.goal_exchange) j["goal_exchange"] = exchange_json(*run.goal_exchange);
  j["rounds"] = run.records.size();
  j["backend_calls"] = run.backend_calls;
  j["records"] = Json::array();
  for (const auto& r : run.records) j["records"].push_back(record_json(r));
  j["final_world"] = detail::to_json(run.final_world.visible());
  if (run.tree) j["tree"] = detail::to_json(*run.tree);
  return j.dump(2) + "\n";
}

}  // namespace btx
