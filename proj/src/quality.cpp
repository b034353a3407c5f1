#include "alner/quality.hpp"

#include <algorithm>
#include <array>

#include "alner/error.hpp"
#include "alner/labels.hpp"

namespace alner {

KappaReport fleiss_kappa(const std::vector<ReannotationSet>& sets) {
  KappaReport report;

  std::vector<const ReannotationSet*> retained;
  for (const auto& set : sets) {
    const bool all_ok = std::all_of(
        set.attempts.begin(), set.attempts.end(),
        [](const AnnotationAttempt& a) { return a.outcome.is_ok(); });
    if (all_ok && !set.attempts.empty()) {
      retained.push_back(&set);
    } else {
      report.excluded_samples.push_back(set.sentence.id);
    }
  }
  if (retained.empty()) throw Error("fleiss_kappa: no retained items");

  const std::size_t raters = retained.front()->attempts.size();
  for (const auto* set : retained) {
    if (set->attempts.size() != raters) {
      throw Error("fleiss_kappa: unequal attempt counts across retained sentences");
    }
  }
  if (raters < 2) throw Error("fleiss_kappa: need at least 2 raters");

  // n_ij: per token (item), how many attempts (raters) chose each category.
  std::size_t n_items = 0;
  double sum_pi = 0.0;
  std::vector<double> category_mass(kNumLabels, 0.0);
  const double r = static_cast<double>(raters);
  for (const auto* set : retained) {
    const std::size_t len = set->sentence.tokens.size();
    for (std::size_t t = 0; t < len; ++t) {
      std::array<std::size_t, kNumLabels> counts{};
      for (const auto& attempt : set->attempts) {
        const auto idx = label_index(attempt.outcome.labels[t]);
        if (!idx) throw Error("fleiss_kappa: attempt carries unknown label");
        ++counts[*idx];
      }
      double sq = 0.0;
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        sq += static_cast<double>(counts[c]) * static_cast<double>(counts[c]);
        category_mass[c] += static_cast<double>(counts[c]);
      }
      sum_pi += (sq - r) / (r * (r - 1.0));
      ++n_items;
    }
  }

  const double n = static_cast<double>(n_items);
  const double p_bar = sum_pi / n;
  double pe = 0.0;
  for (double mass : category_mass) {
    const double pj = mass / (n * r);
    pe += pj * pj;
  }

  report.n_items = n_items;
  report.n_raters = raters;
  if (p_bar >= 1.0) {
    report.kappa = 1.0;  // total agreement, including the Pe == 1 case
  } else {
    report.kappa = (p_bar - pe) / (1.0 - pe);
  }
  return report;
}

ConsistencyReport consistency(const std::vector<ReannotationSet>& sets) {
  ConsistencyReport report;
  if (sets.empty()) throw Error("consistency: no reannotation sets");
  double total = 0.0;
  for (const auto& set : sets) {
    const Sentence& s = set.sentence;
    if (!s.gold) throw Error("consistency: sentence '" + s.id + "' has no gold labels");
    if (set.attempts.empty()) throw Error("consistency: sentence '" + s.id + "' has no attempts");
    const std::size_t len = s.tokens.size();
    std::size_t matches = 0;
    for (const auto& attempt : set.attempts) {
      if (!attempt.outcome.is_ok()) continue;  // full mismatch on every token
      for (std::size_t t = 0; t < len; ++t) {
        if (attempt.outcome.labels[t] == (*s.gold)[t]) ++matches;
      }
    }
    const double denom = static_cast<double>(set.attempts.size() * len);
    const double score = 100.0 * static_cast<double>(matches) / denom;
    report.per_sample[s.id] = score;
    total += score;
  }
  report.overall = total / static_cast<double>(sets.size());
  return report;
}

FormatErrorTally format_error_tally(const std::vector<ReannotationSet>& sets) {
  FormatErrorTally tally;
  bool any_attempt = false;
  bool all_empty = true;
  for (const auto& set : sets) {
    bool has_empty = false;
    bool has_omission = false;
    for (const auto& attempt : set.attempts) {
      any_attempt = true;
      switch (attempt.outcome.kind) {
        case OutcomeKind::Empty:
          has_empty = true;
          break;
        case OutcomeKind::Omission:
          has_omission = true;
          all_empty = false;
          break;
        case OutcomeKind::Ok:
          all_empty = false;
          break;
      }
    }
    if (has_empty) ++tally.empty_sentences;
    if (has_omission) ++tally.omission_sentences;
  }
  tally.omission_not_computable = any_attempt && all_empty;
  return tally;
}

std::optional<double> entity_accuracy(const std::vector<std::string>& pred,
                                      const std::vector<std::string>& gold) {
  if (pred.size() != gold.size()) {
    throw Error("entity_accuracy: pred/gold length mismatch");
  }
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!is_entity_label(gold[i])) continue;
    ++total;
    if (pred[i] == gold[i]) ++correct;
  }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> entity_accuracy_pooled(
    const std::vector<std::pair<std::vector<std::string>,
                                std::vector<std::string>>>& pairs) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (const auto& [pred, gold] : pairs) {
    if (pred.size() != gold.size()) {
      throw Error("entity_accuracy_pooled: pred/gold length mismatch");
    }
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!is_entity_label(gold[i])) continue;
      ++total;
      if (pred[i] == gold[i]) ++correct;
    }
  }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<ReannotationSet> reannotate(const Corpus& subset,
                                        const AnnotatorConfig& cfg,
                                        const FewShotExamples& examples,
                                        AnnotatorBackend& backend, int rounds) {
  if (rounds < 1) throw Error("reannotate: rounds must be >= 1");
  std::vector<ReannotationSet> sets;
  sets.reserve(subset.sentences.size());
  for (const auto& s : subset.sentences) sets.push_back({s, {}});
  for (int r = 0; r < rounds; ++r) {
    auto attempts = annotate(subset.sentences, cfg, examples, backend, r);
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      sets[i].attempts.push_back(std::move(attempts[i]));
    }
  }
  return sets;
}

}  // namespace alner
