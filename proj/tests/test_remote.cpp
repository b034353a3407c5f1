#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "alner/annotator.hpp"
#include "alner/error.hpp"
#include "alner/prompt.hpp"
#include "alner/remote_annotator.hpp"
#include "alner/synth.hpp"

using namespace alner;
using nlohmann::json;

namespace {

// Local chat-completion stand-in. Each test configures a handler; the
// server runs on a background thread for the suite's lifetime.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handler_(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

  void set_handler(
      std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    handler_ = std::move(handler);
  }

 private:
  httplib::Server server_;
  std::function<void(const httplib::Request&, httplib::Response&)> handler_ =
      [](const httplib::Request&, httplib::Response& res) { res.status = 500; };
  int port_ = 0;
  std::thread thread_;
};

std::string chat_body(const std::string& content, int prompt_tokens = 100,
                      int completion_tokens = 20) {
  json doc;
  doc["choices"] =
      json::array({json{{"message", json{{"role", "assistant"}, {"content", content}}}}});
  doc["usage"] = {{"prompt_tokens", prompt_tokens},
                  {"completion_tokens", completion_tokens}};
  return doc.dump();
}

AnnotatorConfig remote_config(const std::string& url) {
  AnnotatorConfig cfg;
  cfg.endpoint_url = url;
  cfg.model_name = "test-model";
  cfg.api_key_env_name = "ALNER_TEST_KEY";
  cfg.max_retries = 3;
  cfg.retry_backoff_ms = 10;
  cfg.max_in_flight = 1;
  return cfg;
}

struct EnvGuard {
  EnvGuard(const char* name, const char* value) : name_(name) {
    setenv(name, value, 1);
  }
  ~EnvGuard() { unsetenv(name_); }
  const char* name_;
};

}  // namespace

TEST_SUITE("remote") {

TEST_CASE("configuration errors fail fast before any request") {
  AnnotatorConfig cfg = remote_config("http://127.0.0.1:1/v1/chat/completions");
  unsetenv("ALNER_TEST_KEY");
  CHECK_THROWS_WITH_AS(RemoteAnnotator{cfg}, doctest::Contains("ALNER_TEST_KEY"),
                       Error);

  EnvGuard key("ALNER_TEST_KEY", "sk-test");
  cfg.endpoint_url = "not-a-url";
  CHECK_THROWS_AS(RemoteAnnotator{cfg}, Error);
  cfg.endpoint_url = "ftp://host/path";
  CHECK_THROWS_AS(RemoteAnnotator{cfg}, Error);
}

TEST_CASE("happy path posts the chat body and extracts the content") {
  EnvGuard key("ALNER_TEST_KEY", "sk-test");
  FakeServer server;
  json seen_body;
  std::string seen_auth;
  server.set_handler([&](const httplib::Request& req, httplib::Response& res) {
    seen_body = json::parse(req.body);
    seen_auth = req.get_header_value("Authorization");
    res.set_content(chat_body(R"({"output": [["Foo","B-PER"],["bar","O"]]})"),
                    "application/json");
  });

  AnnotatorConfig cfg = remote_config(server.url());
  RemoteAnnotator remote(cfg);

  CompletionRequest request;
  request.prompt = "label this";
  request.temperature = 0.1;
  const CompletionResult result = remote.complete(request);

  CHECK(result.transport_ok);
  CHECK(result.http_status == 200);
  CHECK(result.usage.input_tokens == 100);
  CHECK(result.usage.output_tokens == 20);
  CHECK(seen_auth == "Bearer sk-test");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["temperature"] == doctest::Approx(0.1));
  REQUIRE(seen_body["messages"].size() == 1);
  CHECK(seen_body["messages"][0]["role"] == "user");
  CHECK(seen_body["messages"][0]["content"] == "label this");

  const auto outcome = parse_response_single(result.text, {"Foo", "bar"});
  REQUIRE(outcome.is_ok());
  CHECK(outcome.labels == std::vector<std::string>{"B-PER", "O"});
}

TEST_CASE("5xx responses are retried until success") {
  EnvGuard key("ALNER_TEST_KEY", "sk-test");
  FakeServer server;
  std::atomic<int> calls{0};
  server.set_handler([&](const httplib::Request&, httplib::Response& res) {
    if (calls.fetch_add(1) < 2) {
      res.status = 503;
      return;
    }
    res.set_content(chat_body("late but fine"), "application/json");
  });

  RemoteAnnotator remote(remote_config(server.url()));
  const CompletionResult result = remote.complete({});
  CHECK(result.transport_ok);
  CHECK(result.text == "late but fine");
  CHECK(calls.load() == 3);
}

TEST_CASE("persistent failure surfaces as Empty via annotate") {
  EnvGuard key("ALNER_TEST_KEY", "sk-test");
  FakeServer server;
  std::atomic<int> calls{0};
  server.set_handler([&](const httplib::Request&, httplib::Response& res) {
    calls.fetch_add(1);
    res.status = 500;
  });

  SynthConfig synth;
  synth.n_sentences = 20;
  synth.seed = 4;
  const Corpus c = generate_corpus(synth);
  const auto ex = pick_examples(c, 1);

  AnnotatorConfig cfg = remote_config(server.url());
  cfg.max_retries = 2;
  RemoteAnnotator remote(cfg);
  const auto attempts = annotate({c.sentences[0]}, cfg, ex, remote);
  REQUIRE(attempts.size() == 1);
  CHECK(attempts[0].outcome.kind == OutcomeKind::Empty);
  CHECK(attempts[0].raw_response.find("HTTP 500") != std::string::npos);
  CHECK(calls.load() == 3);  // initial try + 2 retries
}

TEST_CASE("4xx responses are not retried") {
  EnvGuard key("ALNER_TEST_KEY", "sk-test");
  FakeServer server;
  std::atomic<int> calls{0};
  server.set_handler([&](const httplib::Request&, httplib::Response& res) {
    calls.fetch_add(1);
    res.status = 401;
  });

  RemoteAnnotator remote(remote_config(server.url()));
  const CompletionResult result = remote.complete({});
  CHECK_FALSE(result.transport_ok);
  CHECK(result.http_status == 401);
  CHECK(calls.load() == 1);
}

TEST_CASE("transcript log captures request and response") {
  EnvGuard key("ALNER_TEST_KEY", "sk-test");
  FakeServer server;
  server.set_handler([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_body(R"({"output": []})"), "application/json");
  });

  SynthConfig synth;
  synth.n_sentences = 20;
  synth.seed = 4;
  const Corpus c = generate_corpus(synth);
  const auto ex = pick_examples(c, 1);

  const auto transcript_path =
      (std::filesystem::temp_directory_path() / "transcript_test.jsonl").string();
  std::filesystem::remove(transcript_path);

  AnnotatorConfig cfg = remote_config(server.url());
  cfg.transcript_path = transcript_path;
  RemoteAnnotator remote(cfg);
  (void)annotate({c.sentences[0], c.sentences[1]}, cfg, ex, remote, 3);

  std::ifstream in(transcript_path);
  REQUIRE(in.good());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    const json rec = json::parse(line);
    CHECK(rec["round"] == 3);
    CHECK(rec["http_status"] == 200);
    CHECK(rec["prompt"].get<std::string>().find("This is your sentence") !=
          std::string::npos);
    CHECK(rec.contains("response"));
    CHECK(rec["usage"]["input_tokens"] == 100);
  }
  CHECK(lines == 2);
}

}  // TEST_SUITE
