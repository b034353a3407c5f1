#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alner/annotator.hpp"
#include "alner/corpus.hpp"

namespace alner {

// All attempts for one sentence across repeated reannotation rounds.
struct ReannotationSet {
  Sentence sentence;
  std::vector<AnnotationAttempt> attempts;
};

struct KappaReport {
  double kappa = 0.0;
  std::size_t n_items = 0;   // tokens of retained sentences
  std::size_t n_raters = 0;  // reannotation attempts
  std::vector<std::string> excluded_samples;
};

// Fleiss' kappa over tokens as items, attempts as raters and the 9 tags as
// categories. A sentence with any non-Ok attempt is excluded entirely and
// listed in the report. Exactly 1.0 when all raters agree on every item.
// Throws with fewer than 2 raters, no retained items, or unequal Ok attempt
// counts across retained sentences.
KappaReport fleiss_kappa(const std::vector<ReannotationSet>& sets);

struct ConsistencyReport {
  std::map<std::string, double> per_sample;  // percentage per sentence id
  double overall = 0.0;                      // unweighted mean over samples
};

// Share of (attempt, token) pairs whose predicted label matches gold, as a
// percentage per sample. Empty and Omission attempts count as a full
// mismatch on every token. With a single attempt this reduces to plain
// token accuracy.
ConsistencyReport consistency(const std::vector<ReannotationSet>& sets);

struct FormatErrorTally {
  std::size_t empty_sentences = 0;     // sentences with >= 1 Empty attempt
  std::size_t omission_sentences = 0;  // sentences with >= 1 Omission attempt
  // Every attempt everywhere was Empty, so omission errors could not be
  // observed at all.
  bool omission_not_computable = false;
};

FormatErrorTally format_error_tally(const std::vector<ReannotationSet>& sets);

// Token accuracy over entity (gold != O) positions only, as a percentage.
// nullopt when the sentence has no entity tokens. Throws on length mismatch.
std::optional<double> entity_accuracy(const std::vector<std::string>& pred,
                                      const std::vector<std::string>& gold);

// Same, pooled over many (pred, gold) pairs.
std::optional<double> entity_accuracy_pooled(
    const std::vector<std::pair<std::vector<std::string>,
                                std::vector<std::string>>>& pairs);

// Runs `rounds` reannotation passes of the subset through the backend and
// groups the attempts per sentence. Round r is passed to the backend so
// deterministic annotators vary across passes reproducibly.
std::vector<ReannotationSet> reannotate(const Corpus& subset,
                                        const AnnotatorConfig& cfg,
                                        const FewShotExamples& examples,
                                        AnnotatorBackend& backend, int rounds);

}  // namespace alner
