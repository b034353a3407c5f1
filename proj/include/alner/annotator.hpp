#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "alner/corpus.hpp"
#include "alner/prompt.hpp"

namespace alner {

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
};

enum class OutcomeKind { Ok, Empty, Omission };

// One parsed annotator verdict for one sentence. Ok carries a label per
// token; Omission records how many pairs the response actually held.
struct AnnotationOutcome {
  OutcomeKind kind = OutcomeKind::Empty;
  std::vector<std::string> labels;      // Ok only
  std::size_t predicted_count = 0;      // Omission only

  static AnnotationOutcome ok(std::vector<std::string> labels);
  static AnnotationOutcome empty();
  static AnnotationOutcome omission(std::size_t predicted_count);

  bool is_ok() const { return kind == OutcomeKind::Ok; }
};

struct AnnotationAttempt {
  std::string sentence_id;
  AnnotationOutcome outcome;
  std::string raw_response;
  double latency_ms = 0.0;
  TokenUsage usage;
  // The request never completed (connection or 4xx/5xx after retries), as
  // opposed to a response that parsed to Empty.
  bool transport_failed = false;
};

struct AnnotatorConfig {
  std::string endpoint_url;
  std::string model_name;
  double temperature = 0.1;
  int max_retries = 3;
  double request_timeout_s = 60.0;
  int batch_size = 1;  // 1 or 2 sentences per request
  std::string api_key_env_name = "ANNOTATOR_API_KEY";
  int max_in_flight = 4;
  // When set, echoed token text must match the input tokens; a mismatch is
  // treated as a format violation. Off by default since models routinely
  // alter whitespace or casing while the labels are still usable.
  bool strict_token_match = false;
  PromptVariant variant = PromptVariant::Default;
  std::string transcript_path;  // JSONL audit log; empty disables
  int retry_backoff_ms = 500;
};

// One completion request as seen by a backend. Remote backends use only the
// prompt; offline backends may use the structured sentence view. `round`
// distinguishes reannotation attempts (and loop iterations) so deterministic
// backends can vary across repeats while staying reproducible.
struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  std::vector<Sentence> sentences;
  int round = 0;
};

struct CompletionResult {
  bool transport_ok = true;
  int http_status = 200;
  std::string text;
  TokenUsage usage;
  std::string error;  // transport failure description
};

class AnnotatorBackend {
 public:
  virtual ~AnnotatorBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

// Maps raw response text to one outcome per expected sentence. Never throws:
// arbitrary bytes produce Empty or Omission, not errors. The first
// well-formed JSON object containing an `output` key is used, so code fences
// and leading prose are tolerated.
std::vector<AnnotationOutcome> parse_response(
    std::string_view raw, const std::vector<std::vector<std::string>>& expected_tokens,
    bool strict_token_match = false);

AnnotationOutcome parse_response_single(std::string_view raw,
                                        const std::vector<std::string>& tokens,
                                        bool strict_token_match = false);

// Annotates the sentences through the backend, batches of cfg.batch_size,
// at most cfg.max_in_flight requests at a time. Returns exactly one attempt
// per sentence, in input order; transport failures surface as Empty.
std::vector<AnnotationAttempt> annotate(const std::vector<Sentence>& sentences,
                                        const AnnotatorConfig& cfg,
                                        const FewShotExamples& examples,
                                        AnnotatorBackend& backend,
                                        int round = 0);

}  // namespace alner
