#pragma once

#include <memory>
#include <string>

#include "alner/annotator.hpp"

namespace alner {

// Chat-completion HTTP client. Posts {model, messages, temperature} to the
// configured endpoint with a bearer token read from the environment, and
// extracts the first choice's message content. Transport errors and 5xx
// responses are retried with exponential backoff up to max_retries; anything
// the server successfully returns (including malformed content) is not.
class RemoteAnnotator : public AnnotatorBackend {
 public:
  // Validates the URL and resolves the API key env var; throws on either,
  // so misconfiguration surfaces before any request is sent.
  explicit RemoteAnnotator(const AnnotatorConfig& cfg);
  ~RemoteAnnotator() override;

  CompletionResult complete(const CompletionRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace alner
