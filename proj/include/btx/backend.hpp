#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "btx/action.hpp"
#include "btx/domain.hpp"

namespace btx {

// One completion request. Besides the prompt text it carries the routing
// context deterministic backends key on.
struct LlmRequest {
  std::string prompt;
  PromptRole role = PromptRole::GoalInterpretation;
  std::string scenario;  // scenario or benchmark item id
  std::string slot;      // parameter resolution
  std::optional<GroundAction> action;
  std::string error_message;
};

struct CompletionSettings {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 512;
};

// complete() may be called concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const LlmRequest& request, const CompletionSettings& settings) = 0;
  virtual std::string name() const = 0;
};

// Lookup keys from most to least specific:
//   "<scenario>/<role>[/<slot>][/<action>]", ..., "<scenario>/<role>"
// e.g. "sand/parameter/tool/Scoop(Sand)". Action text omits non-object slots.
std::vector<std::string> fixture_keys(const LlmRequest& request);

// Canned responses keyed by fixture_keys(); lookup falls back from the most
// to the least specific key. A key with several responses returns them in
// order and then repeats the last one.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::vector<std::string>> responses);

  std::string complete(const LlmRequest& request, const CompletionSettings& settings) override;
  std::string name() const override { return "scripted"; }

 private:
  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, std::size_t> cursor_;
  std::mutex mutex_;
};

// Fixture file: {"format": "btx-fixtures", "version": 1,
//                "responses": {"<key>": "text" | ["text", ...]}}
std::map<std::string, std::vector<std::string>> load_fixtures(const std::filesystem::path& path);
std::map<std::string, std::vector<std::string>> parse_fixtures(std::string_view text,
                                                               const std::string& source);

// Ground-truth answers, rendered in the answer grammar.
struct OracleFault {
  std::string skill;
  std::vector<Term> args;  // objects or wildcards
  std::string message;
  std::string answer;      // literal conjunction text
};

struct OracleParameter {
  std::string skill;
  std::string object;  // first object argument; empty matches any
  std::string slot;
  std::string value;   // "5.3 N", "shovel"
};

struct OracleKnowledge {
  std::string goal;
  std::vector<OracleFault> faults;
  std::vector<OracleParameter> parameters;
};

class OracleBackend : public Backend {
 public:
  OracleBackend() = default;
  void add(const std::string& scenario, OracleKnowledge knowledge);

  std::string complete(const LlmRequest& request, const CompletionSettings& settings) override;
  std::string name() const override { return "oracle"; }

 private:
  std::map<std::string, OracleKnowledge> knowledge_;
};

// Counts calls per role, forwarding to an inner backend.
class CountingBackend : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}

  std::string complete(const LlmRequest& request, const CompletionSettings& settings) override;
  std::string name() const override { return inner_.name(); }

  std::size_t calls() const { return total_.load(); }
  std::size_t calls(PromptRole role) const;

 private:
  Backend& inner_;
  std::atomic<std::size_t> total_{0};
  std::atomic<std::size_t> by_role_[3] = {};
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
};

struct HttpReply {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

// Sends a JSON body; returns nullopt on transport failure (connect, TLS,
// timeout) with a description in `error`.
using HttpTransport = std::function<std::optional<HttpReply>(
    const std::string& url, const std::map<std::string, std::string>& headers,
    const std::string& body, std::string& error)>;

struct RemoteConfig {
  std::string endpoint;  // full chat-completions URL
  std::string api_key;
  std::string model;
  int max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{60};

  // From BTX_LLM_ENDPOINT, BTX_LLM_API_KEY and BTX_LLM_MODEL.
  static RemoteConfig from_env();
};

// Chat-completions client. Retries transport failures only, with
// exponential backoff; HTTP 429 raises RateLimited.
class RemoteBackend : public Backend {
 public:
  // Throws Error(BackendUnavailable) when endpoint or key are missing.
  explicit RemoteBackend(RemoteConfig config, HttpTransport transport = {},
                         std::function<void(std::chrono::milliseconds)> sleep = {});

  std::string complete(const LlmRequest& request, const CompletionSettings& settings) override;
  std::string name() const override { return "remote"; }

  const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
  HttpTransport transport_;
  std::function<void(std::chrono::milliseconds)> sleep_;
  std::counting_semaphore<1024> slots_;
};

// Default transport over cpp-httplib (HTTPS when built with OpenSSL).
HttpTransport http_transport(std::chrono::seconds timeout);

}  // namespace btx
