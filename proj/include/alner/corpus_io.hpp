#pragma once

#include <string>

#include "alner/corpus.hpp"

namespace alner {

// Two-column CoNLL-style file: `token<TAB or single space>tag` per line,
// blank line separates sentences. Sentence ids are `<filename>:<ordinal>`.
Corpus load_conll(const std::string& path);

// Writes `token tag` lines with a single-space separator (tab-separated
// input is normalized on the way out).
void save_conll(const Corpus& c, const std::string& path);

// One JSON object per line with keys `id`, `tokens`, `gold` (nullable),
// `language`. Round-trips every Sentence field.
Corpus load_jsonl(const std::string& path);
void save_jsonl(const Corpus& c, const std::string& path);

}  // namespace alner
