#pragma once

#include <cstdint>
#include <unordered_map>

#include "alner/annotator.hpp"
#include "alner/corpus.hpp"

namespace alner {

// Error profile of a simulated annotator. accuracy is the per-token chance
// the gold label is kept; corrupted tokens get a uniformly random other
// label. empty_rate and omission_rate are per-sentence failure chances.
struct MockProfile {
  double accuracy = 1.0;
  double empty_rate = 0.0;
  double omission_rate = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic offline annotator backed by gold labels. Every random
// decision for a sentence is keyed on (seed, sentence id, round), so the
// same sentence in the same round gets the same treatment whether it is
// annotated alone, inside a batch, concurrently, or after a checkpoint
// resume. Responses go out as wire-format text and through the real parser.
class MockAnnotator : public AnnotatorBackend {
 public:
  MockAnnotator(MockProfile profile, const Corpus& gold_source);

  CompletionResult complete(const CompletionRequest& request) override;

  // profile(1.0, 0, 0, seed): reproduces gold exactly.
  static MockAnnotator oracle(const Corpus& gold_source);

 private:
  MockProfile profile_;
  std::unordered_map<std::string, std::size_t> by_id_;
  Corpus gold_;
};

}  // namespace alner
