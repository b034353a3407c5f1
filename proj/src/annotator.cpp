#include "alner/annotator.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/labels.hpp"

namespace alner {

namespace {

using nlohmann::json;

// Finds the first well-formed JSON object (by starting position) that
// contains an `output` key. Scans brace-balanced candidates so fenced or
// prose-wrapped objects still parse.
std::optional<json> extract_output_object(std::string_view raw) {
  for (std::size_t start = 0; start < raw.size(); ++start) {
    if (raw[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          json candidate = json::parse(raw.substr(start, i - start + 1),
                                       nullptr, /*allow_exceptions=*/false);
          if (!candidate.is_discarded() && candidate.is_object() &&
              candidate.contains("output")) {
            return candidate;
          }
          break;  // well-nested but not what we want; try next '{'
        }
      }
    }
  }
  return std::nullopt;
}

// Scores one pair list against one token list.
AnnotationOutcome score_pair_list(const json& pairs,
                                  const std::vector<std::string>& tokens,
                                  bool strict_token_match) {
  if (!pairs.is_array()) return AnnotationOutcome::omission(0);
  const std::size_t count = pairs.size();
  std::vector<std::string> labels;
  labels.reserve(count);
  bool valid = count == tokens.size();
  for (std::size_t i = 0; valid && i < count; ++i) {
    const json& pair = pairs[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[1].is_string()) {
      valid = false;
      break;
    }
    std::string label = pair[1].get<std::string>();
    if (!is_valid_label(label)) {
      valid = false;
      break;
    }
    if (strict_token_match &&
        (!pair[0].is_string() || pair[0].get<std::string>() != tokens[i])) {
      valid = false;
      break;
    }
    labels.push_back(std::move(label));
  }
  if (!valid) return AnnotationOutcome::omission(count);
  return AnnotationOutcome::ok(std::move(labels));
}

struct Request {
  CompletionRequest completion;
  std::vector<std::size_t> sentence_indices;
};

class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::string& path) {
    if (!path.empty()) {
      out_.open(path, std::ios::app);
      if (!out_) throw Error("cannot open transcript file '" + path + "'");
    }
  }

  void write(const CompletionRequest& req, const CompletionResult& res,
             double latency_ms, const std::vector<std::string>& ids) {
    if (!out_.is_open()) return;
    json line;
    line["round"] = req.round;
    line["sentence_ids"] = ids;
    line["prompt"] = req.prompt;
    line["temperature"] = req.temperature;
    line["transport_ok"] = res.transport_ok;
    line["http_status"] = res.http_status;
    line["response"] = res.text;
    line["error"] = res.error;
    line["latency_ms"] = latency_ms;
    line["usage"] = {{"input_tokens", res.usage.input_tokens},
                     {"output_tokens", res.usage.output_tokens}};
    std::lock_guard<std::mutex> lock(mu_);
    out_ << line.dump() << '\n';
  }

 private:
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace

AnnotationOutcome AnnotationOutcome::ok(std::vector<std::string> labels) {
  AnnotationOutcome o;
  o.kind = OutcomeKind::Ok;
  o.labels = std::move(labels);
  return o;
}

AnnotationOutcome AnnotationOutcome::empty() { return AnnotationOutcome{}; }

AnnotationOutcome AnnotationOutcome::omission(std::size_t predicted_count) {
  AnnotationOutcome o;
  o.kind = OutcomeKind::Omission;
  o.predicted_count = predicted_count;
  return o;
}

std::vector<AnnotationOutcome> parse_response(
    std::string_view raw, const std::vector<std::vector<std::string>>& expected_tokens,
    bool strict_token_match) {
  std::vector<AnnotationOutcome> out(expected_tokens.size());

  auto object = extract_output_object(raw);
  if (!object) return out;  // all Empty

  const json& output = (*object)["output"];
  if (expected_tokens.size() == 1) {
    out[0] = score_pair_list(output, expected_tokens[0], strict_token_match);
    return out;
  }

  // Batch framing: `output` is an ordered array with one pair list per
  // sentence. Each slot is scored independently; a missing or null slot means
  // the annotator produced nothing for that sentence.
  if (!output.is_array()) {
    for (auto& o : out) o = AnnotationOutcome::omission(0);
    return out;
  }
  for (std::size_t i = 0; i < expected_tokens.size(); ++i) {
    if (i >= output.size() || output[i].is_null()) {
      out[i] = AnnotationOutcome::empty();
    } else {
      out[i] = score_pair_list(output[i], expected_tokens[i], strict_token_match);
    }
  }
  return out;
}

AnnotationOutcome parse_response_single(std::string_view raw,
                                        const std::vector<std::string>& tokens,
                                        bool strict_token_match) {
  return parse_response(raw, {tokens}, strict_token_match)[0];
}

std::vector<AnnotationAttempt> annotate(const std::vector<Sentence>& sentences,
                                        const AnnotatorConfig& cfg,
                                        const FewShotExamples& examples,
                                        AnnotatorBackend& backend,
                                        int round) {
  if (cfg.batch_size != 1 && cfg.batch_size != 2) {
    throw Error("annotate: batch_size must be 1 or 2");
  }
  if (cfg.max_in_flight < 1) throw Error("annotate: max_in_flight must be >= 1");

  const std::string language = examples.no_entity_example.language;

  std::vector<Request> requests;
  for (std::size_t i = 0; i < sentences.size(); i += cfg.batch_size) {
    Request r;
    std::vector<Sentence> group;
    for (std::size_t j = i; j < std::min(i + cfg.batch_size, sentences.size()); ++j) {
      group.push_back(sentences[j]);
      r.sentence_indices.push_back(j);
    }
    r.completion.prompt = build_prompt(language, examples, group, cfg.variant);
    r.completion.temperature = cfg.temperature;
    r.completion.sentences = std::move(group);
    r.completion.round = round;
    requests.push_back(std::move(r));
  }

  TranscriptWriter transcript(cfg.transcript_path);
  std::vector<AnnotationAttempt> attempts(sentences.size());

  auto run_request = [&](const Request& r) {
    const auto t0 = std::chrono::steady_clock::now();
    CompletionResult res = backend.complete(r.completion);
    const double latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> token_lists;
    for (const auto& s : r.completion.sentences) {
      ids.push_back(s.id);
      token_lists.push_back(s.tokens);
    }
    transcript.write(r.completion, res, latency_ms, ids);

    std::vector<AnnotationOutcome> outcomes;
    std::string raw;
    if (!res.transport_ok) {
      outcomes.assign(token_lists.size(), AnnotationOutcome::empty());
      raw = "[transport error] " + res.error;
    } else {
      outcomes = parse_response(res.text, token_lists, cfg.strict_token_match);
      raw = res.text;
    }

    const std::size_t n = r.sentence_indices.size();
    for (std::size_t k = 0; k < n; ++k) {
      AnnotationAttempt& a = attempts[r.sentence_indices[k]];
      a.sentence_id = ids[k];
      a.outcome = std::move(outcomes[k]);
      a.raw_response = raw;
      a.transport_failed = !res.transport_ok;
      a.latency_ms = latency_ms;
      // Request-level usage split evenly across the sentences it covered.
      a.usage.input_tokens = res.usage.input_tokens / static_cast<std::int64_t>(n) +
                             (k == 0 ? res.usage.input_tokens % static_cast<std::int64_t>(n) : 0);
      a.usage.output_tokens = res.usage.output_tokens / static_cast<std::int64_t>(n) +
                              (k == 0 ? res.usage.output_tokens % static_cast<std::int64_t>(n) : 0);
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), requests.size());
  if (n_workers <= 1) {
    for (const auto& r : requests) run_request(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= requests.size()) return;
          try {
            run_request(requests[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  return attempts;
}

}  // namespace alner
