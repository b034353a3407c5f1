#pragma once

#include <optional>
#include <string>
#include <vector>

namespace alner {

// One pre-tokenized sentence. Tokens come whitespace-split from the source
// corpus; no tokenizer lives in this project. `gold` is optional because
// pool sentences in the annotation loop carry no reference labels.
struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::optional<std::vector<std::string>> gold;
  std::string language;

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::string language;

  bool operator==(const Corpus&) const = default;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
};

// Throws Error when structural invariants are broken: empty token list,
// empty token string, gold/token length mismatch, or unknown gold tag.
// Gold BIO sequence defects are deliberately not rejected here; see lint_bio.
void validate_sentence(const Sentence& s);

// Also checks id uniqueness across the corpus.
void validate_corpus(const Corpus& c);

// Fraction of tokens whose gold tag is not O. Throws when gold is absent.
double entity_proportion(const Sentence& s);

// Number of tokens whose gold tag is not O (0 when gold absent).
std::size_t entity_token_count(const Sentence& s);

struct BioViolation {
  std::string sentence_id;
  std::size_t position;
  std::string message;
};

// Reports I-X tags that do not continue a B-X/I-X run. Source data may
// legitimately contain these; callers decide what to do about them.
std::vector<BioViolation> lint_bio(const Corpus& c);

}  // namespace alner
