#include "alner/remote_annotator.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alner/error.hpp"

namespace alner {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string host_and_scheme;  // e.g. "http://localhost:8080"
  std::string path;             // e.g. "/v1/chat/completions"
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("RemoteAnnotator: endpoint URL '" + url + "' has no scheme");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error("RemoteAnnotator: unsupported scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.host_and_scheme = url;
    out.path = "/";
  } else {
    out.host_and_scheme = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  if (out.host_and_scheme.size() <= scheme_end + 3) {
    throw Error("RemoteAnnotator: endpoint URL '" + url + "' has no host");
  }
  return out;
}

bool retryable_status(int status) { return status >= 500 && status < 600; }

}  // namespace

struct RemoteAnnotator::Impl {
  AnnotatorConfig cfg;
  ParsedUrl url;
  std::string api_key;
};

RemoteAnnotator::RemoteAnnotator(const AnnotatorConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  impl_->cfg = cfg;
  impl_->url = parse_url(cfg.endpoint_url);
  if (cfg.api_key_env_name.empty()) {
    throw Error("RemoteAnnotator: api_key_env_name is empty");
  }
  const char* key = std::getenv(cfg.api_key_env_name.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error("RemoteAnnotator: environment variable '" + cfg.api_key_env_name +
                "' is not set");
  }
  impl_->api_key = key;
}

RemoteAnnotator::~RemoteAnnotator() = default;

CompletionResult RemoteAnnotator::complete(const CompletionRequest& request) {
  const AnnotatorConfig& cfg = impl_->cfg;

  json body;
  body["model"] = cfg.model_name;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  const std::string payload = body.dump();

  httplib::Headers headers = {{"Authorization", "Bearer " + impl_->api_key}};

  CompletionResult result;
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(impl_->url.host_and_scheme);
    client.set_connection_timeout(std::chrono::duration<double>(cfg.request_timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg.request_timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(cfg.request_timeout_s));

    auto res = client.Post(impl_->url.path, headers, payload, "application/json");

    bool retry = false;
    if (!res) {
      result.transport_ok = false;
      result.http_status = 0;
      result.error = "transport error: " + httplib::to_string(res.error());
      retry = true;
    } else if (retryable_status(res->status)) {
      result.transport_ok = false;
      result.http_status = res->status;
      result.error = "server error: HTTP " + std::to_string(res->status);
      retry = true;
    } else if (res->status < 200 || res->status >= 300) {
      // 4xx: the request itself is bad; retrying will not help.
      result.transport_ok = false;
      result.http_status = res->status;
      result.error = "request rejected: HTTP " + std::to_string(res->status);
      return result;
    } else {
      result.transport_ok = true;
      result.http_status = res->status;
      result.error.clear();
      json payload_json = json::parse(res->body, nullptr, false);
      if (!payload_json.is_discarded() && payload_json.contains("choices") &&
          payload_json["choices"].is_array() && !payload_json["choices"].empty()) {
        const json& choice = payload_json["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string()) {
          result.text = choice["message"]["content"].get<std::string>();
        }
      }
      if (payload_json.is_object() && payload_json.contains("usage")) {
        const json& usage = payload_json["usage"];
        result.usage.input_tokens = usage.value("prompt_tokens", 0);
        result.usage.output_tokens = usage.value("completion_tokens", 0);
      }
      return result;
    }

    if (!retry || attempt >= cfg.max_retries) return result;
    const auto delay =
        std::chrono::milliseconds(cfg.retry_backoff_ms) * (1LL << attempt);
    std::this_thread::sleep_for(delay);
  }
}

}  // namespace alner
