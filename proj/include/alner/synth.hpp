#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "alner/corpus.hpp"

namespace alner {

// Synthetic BIO corpus with lexical entity cues a featurized classifier can
// learn: each entity class draws from its own lexicon, and most lexicon
// tokens carry a class-specific suffix so affix features generalize beyond
// memorized tokens. Sentence entity density is a mixture (entity-free,
// moderate, and dense list-like sentences) so proportion filters have
// something to reject on both ends.
struct SynthConfig {
  std::size_t n_sentences = 1000;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 24;
  std::size_t background_vocab = 4000;
  std::size_t lexicon_per_class = 700;
  double cue_prob = 0.5;        // chance an entity token carries its suffix cue
  double no_entity_frac = 0.25; // sentences with no entities at all
  double dense_frac = 0.15;     // list-like sentences, mostly entities
  std::uint64_t seed = 0;
  std::string language = "syn";
  std::string id_prefix = "syn";
};

Corpus generate_corpus(const SynthConfig& cfg);

// Head/tail split; the halves share one vocabulary universe, so train/test
// pairs must come from a single generated corpus rather than two seeds.
std::pair<Corpus, Corpus> split_corpus(const Corpus& c, std::size_t n_head);

}  // namespace alner
