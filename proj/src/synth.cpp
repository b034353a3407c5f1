#include "alner/synth.hpp"

#include <array>
#include <cmath>

#include "alner/error.hpp"
#include "alner/labels.hpp"
#include "alner/rng.hpp"

namespace alner {

namespace {

// Separate affix cues for span-initial and span-continuation tokens, so both
// the entity class and the B/I distinction are lexically learnable.
const std::array<std::string, 4> kBeginSuffix = {"an", "corp", "ville", "ber"};
const std::array<std::string, 4> kInsideSuffix = {"sen", "tech", "burg", "day"};

std::string syllables(Rng& rng, std::size_t count, bool capitalize) {
  static const char* kCons = "bcdfgklmnprstvz";
  static const char* kVowel = "aeiou";
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    out += kCons[rng.index(15)];
    out += kVowel[rng.index(5)];
  }
  if (capitalize && !out.empty()) out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

std::vector<std::string> build_background_vocab(Rng& rng, std::size_t size) {
  std::vector<std::string> vocab;
  vocab.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    vocab.push_back(syllables(rng, 1 + rng.index(3), false));
  }
  return vocab;
}

std::vector<std::string> build_lexicon(Rng& rng, std::size_t cls, bool inside,
                                       std::size_t size, double cue_prob) {
  std::vector<std::string> lex;
  lex.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::string tok;
    if (cls == 3 && rng.bernoulli(0.4)) {
      // date-like numeric token: years open a span, day numbers continue it
      tok = inside ? std::to_string(1 + rng.index(31))
                   : std::to_string(1900 + rng.index(200));
    } else {
      tok = syllables(rng, 1 + rng.index(2), true);
      if (rng.bernoulli(cue_prob)) {
        tok += inside ? kInsideSuffix[cls] : kBeginSuffix[cls];
      }
    }
    lex.push_back(std::move(tok));
  }
  return lex;
}

// Skewed draw so a handful of background words dominate, like real text.
const std::string& zipfish(Rng& rng, const std::vector<std::string>& vocab) {
  double u = rng.uniform();
  std::size_t i = static_cast<std::size_t>(u * u * static_cast<double>(vocab.size()));
  if (i >= vocab.size()) i = vocab.size() - 1;
  return vocab[i];
}

}  // namespace

Corpus generate_corpus(const SynthConfig& cfg) {
  if (cfg.n_sentences == 0) throw Error("generate_corpus: n_sentences must be > 0");
  if (cfg.min_tokens < 1 || cfg.min_tokens > cfg.max_tokens) {
    throw Error("generate_corpus: bad token length range");
  }

  Rng rng(derive_seed(cfg.seed, "synth"));
  const auto background = build_background_vocab(rng, cfg.background_vocab);
  std::array<std::vector<std::string>, 4> begin_lex;
  std::array<std::vector<std::string>, 4> inside_lex;
  for (std::size_t c = 0; c < 4; ++c) {
    begin_lex[c] = build_lexicon(rng, c, false, cfg.lexicon_per_class, cfg.cue_prob);
    inside_lex[c] = build_lexicon(rng, c, true, cfg.lexicon_per_class, cfg.cue_prob);
  }

  Corpus corpus;
  corpus.language = cfg.language;
  corpus.sentences.reserve(cfg.n_sentences);

  for (std::size_t n = 0; n < cfg.n_sentences; ++n) {
    const std::size_t len =
        cfg.min_tokens + rng.index(cfg.max_tokens - cfg.min_tokens + 1);

    double start_prob;
    const double mode = rng.uniform();
    if (mode < cfg.no_entity_frac) {
      start_prob = 0.0;
    } else if (mode < cfg.no_entity_frac + cfg.dense_frac) {
      start_prob = rng.uniform_range(0.45, 0.9);
    } else {
      start_prob = rng.uniform_range(0.04, 0.3);
    }

    Sentence s;
    s.id = cfg.id_prefix + ":" + std::to_string(n);
    s.language = cfg.language;
    std::vector<std::string> gold;
    std::size_t i = 0;
    while (i < len) {
      if (start_prob > 0.0 && rng.bernoulli(start_prob)) {
        const std::size_t cls = rng.index(4);
        std::size_t span = 1 + rng.index(3);
        span = std::min(span, len - i);
        for (std::size_t k = 0; k < span; ++k) {
          const auto& lex = k == 0 ? begin_lex[cls] : inside_lex[cls];
          s.tokens.push_back(lex[rng.index(lex.size())]);
          gold.push_back(std::string(k == 0 ? "B-" : "I-") +
                         std::string(kEntityClasses[cls]));
        }
        i += span;
      } else {
        s.tokens.push_back(zipfish(rng, background));
        gold.push_back("O");
        ++i;
      }
    }
    s.gold = std::move(gold);
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& c, std::size_t n_head) {
  if (n_head > c.size()) throw Error("split_corpus: split point past corpus end");
  Corpus head;
  Corpus tail;
  head.language = tail.language = c.language;
  head.sentences.assign(c.sentences.begin(),
                        c.sentences.begin() + static_cast<std::ptrdiff_t>(n_head));
  tail.sentences.assign(c.sentences.begin() + static_cast<std::ptrdiff_t>(n_head),
                        c.sentences.end());
  return {std::move(head), std::move(tail)};
}

}  // namespace alner
