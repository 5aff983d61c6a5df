#include <atomic>
#include <thread>

#include "btx/backend.hpp"
#include "btx/error.hpp"
#include "doctest.h"
#include "json.hpp"
#include "paths.hpp"

using namespace btx;

namespace {

LlmRequest failure_request(const char* scenario, const char* skill, const char* obj) {
  LlmRequest r;
  r.role = PromptRole::FailureResolution;
  r.scenario = scenario;
  r.action = GroundAction{skill, {{"obj", ObjectValue{obj}}}};
  r.error_message = "No collision free path found";
  return r;
}

std::string completion(const std::string& content) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return j.dump();
}

RemoteConfig remote_config() {
  RemoteConfig c;
  c.endpoint = "https://llm.example/v1/chat/completions";
  c.api_key = "k";
  c.model = "m";
  c.retry.initial_backoff = std::chrono::milliseconds(100);
  return c;
}

}  // namespace

TEST_CASE("fixture keys go from specific to general") {
  LlmRequest r;
  r.role = PromptRole::ParameterResolution;
  r.scenario = "sand";
  r.slot = "tool";
  r.action = GroundAction{"Scoop", {{"material", ObjectValue{"Sand"}}, {"tool", CategoryValue{"x", false}}}};
  auto keys = fixture_keys(r);
  REQUIRE(keys.size() == 3);
  CHECK(keys[0] == "sand/parameter/tool/Scoop(Sand)");
  CHECK(keys[1] == "sand/parameter/tool");
  CHECK(keys[2] == "sand/parameter");
}

TEST_CASE("scripted backend falls back and replays sequences") {
  ScriptedBackend b({{"s/failure/grasp(blue_cube)", {"ANSWER: a()", "ANSWER: b()"}}, {"s/failure", {"ANSWER: c()"}}});
  CompletionSettings settings;
  CHECK(b.complete(failure_request("s", "grasp", "blue_cube"), settings) == "ANSWER: a()");
  CHECK(b.complete(failure_request("s", "grasp", "blue_cube"), settings) == "ANSWER: b()");
  CHECK(b.complete(failure_request("s", "grasp", "blue_cube"), settings) == "ANSWER: b()");
  CHECK(b.complete(failure_request("s", "grasp", "red_cube"), settings) == "ANSWER: c()");
  try {
    b.complete(failure_request("other", "grasp", "red_cube"), settings);
    FAIL("expected MissingFixture");
  } catch (const MissingFixture& e) {
    CHECK(e.key() == "other/failure/grasp(red_cube)");
  }
}

TEST_CASE("fixture files are validated") {
  auto f = parse_fixtures(R"J({"format": "btx-fixtures", "version": 1, "responses": {"a/goal": "ANSWER: x()", "b/goal": ["1", "2"]}})J",
                          "f.json");
  CHECK(f.at("b/goal").size() == 2);
  CHECK_THROWS_AS(parse_fixtures(R"J({"format": "btx-fixtures", "version": 1, "responses": {"a": 3}})J", "f.json"),
                  SchemaError);
  CHECK_NOTHROW(load_fixtures(testdata::data() / "fixtures" / "scenarios.json"));
}

TEST_CASE("oracle backend answers from knowledge") {
  OracleBackend o;
  o.add("s", OracleKnowledge{"on(blue_cube, green_cube)",
                             {OracleFault{"grasp", {Term::object("blue_cube")}, "No collision free path found",
                                          "~on(any_object, blue_cube)"}},
                             {OracleParameter{"Pick", "Egg", "force", "5.3 N"}}});
  CompletionSettings settings;
  LlmRequest g;
  g.scenario = "s";
  CHECK(o.complete(g, settings) == "ANSWER: on(blue_cube, green_cube)");
  CHECK(o.complete(failure_request("s", "grasp", "blue_cube"), settings) == "ANSWER: ~on(any_object, blue_cube)");
  CHECK_THROWS_AS(o.complete(failure_request("s", "grasp", "red_cube"), settings), MissingFixture);
  LlmRequest p;
  p.role = PromptRole::ParameterResolution;
  p.scenario = "s";
  p.slot = "force";
  p.action = GroundAction{"Pick", {{"obj", ObjectValue{"Egg"}}}};
  CHECK(o.complete(p, settings) == "ANSWER: 5.3 N");
}

TEST_CASE("counting backend counts per role, also concurrently") {
  ScriptedBackend inner({{"s/goal", {"ANSWER: x()"}}, {"s/failure", {"ANSWER: y()"}}});
  CountingBackend counting(inner);
  LlmRequest g;
  g.scenario = "s";
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i) counting.complete(g, {});
    });
  for (auto& t : threads) t.join();
  counting.complete(failure_request("s", "grasp", "a"), {});
  CHECK(counting.calls() == 101);
  CHECK(counting.calls(PromptRole::GoalInterpretation) == 100);
  CHECK(counting.calls(PromptRole::FailureResolution) == 1);
  CHECK(counting.calls(PromptRole::ParameterResolution) == 0);
}

TEST_CASE("remote backend needs endpoint and key") {
  RemoteConfig c = remote_config();
  c.api_key.clear();
  try {
    RemoteBackend b(c);
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BackendUnavailable);
  }
  c = remote_config();
  c.endpoint = "not a url";
  CHECK_THROWS_AS(RemoteBackend{c}, Error);
}

TEST_CASE("remote backend sends a chat request and reads the first choice") {
  std::string seen_body, seen_url, seen_auth;
  HttpTransport t = [&](const std::string& url, const std::map<std::string, std::string>& headers,
                        const std::string& body, std::string&) -> std::optional<HttpReply> {
    seen_url = url;
    seen_body = body;
    seen_auth = headers.at("Authorization");
    return HttpReply{200, completion("ANSWER: on(a, b)"), {}};
  };
  RemoteBackend b(remote_config(), t, [](auto) {});
  LlmRequest r;
  r.prompt = "hello";
  CompletionSettings s;
  s.temperature = 0.0;
  CHECK(b.complete(r, s) == "ANSWER: on(a, b)");
  CHECK(seen_url == remote_config().endpoint);
  CHECK(seen_auth == "Bearer k");
  auto body = nlohmann::json::parse(seen_body);
  CHECK(body["model"] == "m");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"][0]["content"] == "hello");
}

TEST_CASE("transport failures are retried with exponential backoff") {
  int attempts = 0;
  std::vector<long long> sleeps;
  HttpTransport flaky = [&](const std::string&, const std::map<std::string, std::string>&, const std::string&,
                            std::string& error) -> std::optional<HttpReply> {
    if (++attempts < 3) {
      error = "connection refused";
      return std::nullopt;
    }
    return HttpReply{200, completion("ok"), {}};
  };
  RemoteBackend b(remote_config(), flaky, [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
  CHECK(b.complete({}, {}) == "ok");
  CHECK(attempts == 3);
  CHECK(sleeps == std::vector<long long>{100, 200});

  attempts = -100;
  sleeps.clear();
  try {
    b.complete({}, {});
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BackendUnavailable);
    CHECK(std::string(e.what()).find("connection refused") != std::string::npos);
  }
  CHECK(sleeps.size() == 3);
}

TEST_CASE("HTTP errors are not retried") {
  int attempts = 0;
  auto reply_with = [&](HttpReply reply) {
    return [&attempts, reply](const std::string&, const std::map<std::string, std::string>&, const std::string&,
                              std::string&) -> std::optional<HttpReply> {
      ++attempts;
      return reply;
    };
  };
  {
    RemoteBackend b(remote_config(), reply_with({429, "", {{"Retry-After", "7"}}}), [](auto) {});
    try {
      b.complete({}, {});
      FAIL("expected RateLimited");
    } catch (const RateLimited& e) {
      CHECK(e.retry_after_seconds() == doctest::Approx(7.0));
    }
  }
  {
    RemoteBackend b(remote_config(), reply_with({500, "oops", {}}), [](auto) {});
    try {
      b.complete({}, {});
      FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BackendUnavailable);
      CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
    }
  }
  {
    RemoteBackend b(remote_config(), reply_with({200, "{\"choices\": []}", {}}), [](auto) {});
    CHECK_THROWS_AS(b.complete({}, {}), Error);
  }
  CHECK(attempts == 3);
}
