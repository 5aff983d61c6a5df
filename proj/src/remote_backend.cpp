#include <cstdlib>
#include <thread>

#include "btx/backend.hpp"
#include "btx/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace btx {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorKind::BackendUnavailable, "endpoint '" + url + "' is not an http(s) URL");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

double parse_retry_after(const std::map<std::string, std::string>& headers) {
  for (const auto& [k, v] : headers) {
    std::string lower = k;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "retry-after") {
      char* end = nullptr;
      double seconds = std::strtod(v.c_str(), &end);
      if (end != v.c_str() && seconds >= 0) return seconds;
    }
  }
  return 0.0;
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  c.endpoint = env_or_empty("BTX_LLM_ENDPOINT");
  c.api_key = env_or_empty("BTX_LLM_API_KEY");
  c.model = env_or_empty("BTX_LLM_MODEL");
  if (c.model.empty()) c.model = "gpt-4-1106-preview";
  return c;
}

HttpTransport http_transport(std::chrono::seconds timeout) {
  return [timeout](const std::string& url, const std::map<std::string, std::string>& headers,
                   const std::string& body, std::string& error) -> std::optional<HttpReply> {
    SplitUrl target = split_url(url);
    httplib::Client client(target.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(target.path, h, body, "application/json");
    if (!result) {
      error = httplib::to_string(result.error());
      return std::nullopt;
    }
    HttpReply reply;
    reply.status = result->status;
    reply.body = result->body;
    for (const auto& [k, v] : result->headers) reply.headers[k] = v;
    return reply;
  };
}

RemoteBackend::RemoteBackend(RemoteConfig config, HttpTransport transport,
                             std::function<void(std::chrono::milliseconds)> sleep)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleep_(std::move(sleep)),
      slots_(std::clamp(config_.max_in_flight, 1, 1024)) {
  if (config_.endpoint.empty())
    throw Error(ErrorKind::BackendUnavailable, "remote backend needs BTX_LLM_ENDPOINT");
  if (config_.api_key.empty())
    throw Error(ErrorKind::BackendUnavailable, "remote backend needs BTX_LLM_API_KEY");
  split_url(config_.endpoint);
  if (!transport_) transport_ = http_transport(config_.timeout);
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string RemoteBackend::complete(const LlmRequest& request, const CompletionSettings& settings) {
  nlohmann::json body;
  body["model"] = settings.model.empty() ? config_.model : settings.model;
  body["temperature"] = settings.temperature;
  body["max_tokens"] = settings.max_tokens;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
  const std::string payload = body.dump();
  const std::map<std::string, std::string> headers{
      {"Authorization", "Bearer " + config_.api_key}};

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  auto backoff = config_.retry.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, config_.retry.max_attempts); ++attempt) {
    std::string error;
    std::optional<HttpReply> reply = transport_(config_.endpoint, headers, payload, error);
    if (!reply) {
      last_error = error.empty() ? "transport error" : error;
      if (attempt < config_.retry.max_attempts) {
        sleep_(backoff);
        auto next = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
        backoff = std::min(next, config_.retry.max_backoff);
      }
      continue;
    }
    if (reply->status == 429)
      throw RateLimited("rate limited by " + config_.endpoint, parse_retry_after(reply->headers));
    if (reply->status != 200)
      throw Error(ErrorKind::BackendUnavailable,
                  "HTTP " + std::to_string(reply->status) + " from " + config_.endpoint);
    auto parsed = nlohmann::json::parse(reply->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty())
      throw Error(ErrorKind::BackendUnavailable, "malformed completion response");
    const auto& message = parsed["choices"][0]["message"];
    if (!message.is_object() || !message.contains("content") || !message["content"].is_string())
      throw Error(ErrorKind::BackendUnavailable, "completion response has no message content");
    return message["content"].get<std::string>();
  }
  throw Error(ErrorKind::BackendUnavailable,
              "no response after " + std::to_string(config_.retry.max_attempts) + " attempts: " + last_error);
}

}  // namespace btx
