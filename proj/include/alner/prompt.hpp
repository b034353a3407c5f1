#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alner/corpus.hpp"

namespace alner {

enum class PromptVariant { Default, Shortened };

// The two in-context worked examples inserted into every prompt: one sentence
// without entities, one with at least one entity token, both in the target
// language and both carrying gold labels.
struct FewShotExamples {
  Sentence no_entity_example;
  Sentence entity_example;
};

// Draws the example pair from a held-out split, deterministically under seed.
// Throws when the split lacks a qualifying sentence of either kind.
FewShotExamples pick_examples(const Corpus& test_split, std::uint64_t seed);

// {"input": [...], "language": "...", "output": [[token, label], ...]}
std::string serialize_example(const Sentence& s);

// The wire shape the annotator is instructed to produce. The batch form
// nests one pair list per sentence, in request order.
std::string serialize_wire_output(const std::vector<std::string>& tokens,
                                  const std::vector<std::string>& labels);
std::string serialize_wire_output_batch(
    const std::vector<std::vector<std::string>>& tokens,
    const std::vector<std::vector<std::string>>& labels);

// Renders the full instruction prompt for one or two sentences. The Default
// variant is the complete template; Shortened drops the three format-
// explanation sentences. Throws when a sentence's language differs from the
// examples' language or when more than two sentences are passed.
std::string build_prompt(const std::string& language,
                         const FewShotExamples& examples,
                         const std::vector<Sentence>& sentences,
                         PromptVariant variant);

}  // namespace alner
