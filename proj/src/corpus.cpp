#include "alner/corpus.hpp"

#include <unordered_set>

#include "alner/error.hpp"
#include "alner/labels.hpp"

namespace alner {

void validate_sentence(const Sentence& s) {
  if (s.tokens.empty()) throw Error("sentence '" + s.id + "': empty token list");
  for (const auto& t : s.tokens) {
    if (t.empty()) throw Error("sentence '" + s.id + "': empty token string");
  }
  if (s.gold) {
    if (s.gold->size() != s.tokens.size()) {
      throw Error("sentence '" + s.id + "': gold/token length mismatch (" +
                  std::to_string(s.gold->size()) + " vs " +
                  std::to_string(s.tokens.size()) + ")");
    }
    for (const auto& tag : *s.gold) {
      if (!is_valid_label(tag)) {
        throw Error("sentence '" + s.id + "': unknown tag '" + tag + "'");
      }
    }
  }
}

void validate_corpus(const Corpus& c) {
  std::unordered_set<std::string> ids;
  for (const auto& s : c.sentences) {
    validate_sentence(s);
    if (!ids.insert(s.id).second) throw Error("duplicate sentence id '" + s.id + "'");
  }
}

double entity_proportion(const Sentence& s) {
  if (!s.gold) throw Error("entity_proportion: sentence '" + s.id + "' has no gold labels");
  if (s.tokens.empty()) throw Error("entity_proportion: sentence '" + s.id + "' is empty");
  return static_cast<double>(entity_token_count(s)) / static_cast<double>(s.tokens.size());
}

std::size_t entity_token_count(const Sentence& s) {
  if (!s.gold) return 0;
  std::size_t n = 0;
  for (const auto& tag : *s.gold) {
    if (is_entity_label(tag)) ++n;
  }
  return n;
}

std::vector<BioViolation> lint_bio(const Corpus& c) {
  std::vector<BioViolation> out;
  for (const auto& s : c.sentences) {
    if (!s.gold) continue;
    std::string prev = "O";
    for (std::size_t i = 0; i < s.gold->size(); ++i) {
      const std::string& tag = (*s.gold)[i];
      if (tag.size() > 2 && tag[0] == 'I') {
        const std::string cls = tag.substr(2);
        const bool continues = prev.size() > 2 && prev.substr(2) == cls &&
                               (prev[0] == 'B' || prev[0] == 'I');
        if (!continues) {
          out.push_back({s.id, i, tag + " does not continue a " + cls + " span"});
        }
      }
      prev = tag;
    }
  }
  return out;
}

}  // namespace alner
