#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alner/annotator.hpp"
#include "alner/corpus.hpp"
#include "alner/mock_annotator.hpp"
#include "alner/tagger.hpp"

namespace alner {

enum class AnnotatorKind { Oracle, Mock, Remote };

struct CostModel {
  double usd_per_1m_input = 0.0;
  double usd_per_1m_output = 0.0;
  double human_cost_per_200_sentences = 0.0;
  int n_human_annotators = 1;
};

struct LoopConfig {
  double seed_fraction = 0.05;
  double select_fraction = 0.05;
  int max_iterations = 5;
  AnnotatorKind annotator = AnnotatorKind::Oracle;
  MockProfile mock;            // used when annotator == Mock
  AnnotatorConfig annotation;  // batching, prompt variant, remote endpoint
  bool baseline = false;
  std::uint64_t seed = 0;
  std::uint64_t examples_seed = 0;
  TrainConfig train;
  std::optional<CostModel> cost_model;
  // When set, every finished iteration is checkpointed here and an existing
  // checkpoint is resumed from.
  std::string checkpoint_dir;
};

struct IterationRecord {
  int iteration = 0;  // 0 is the seed-only model, before any annotation
  std::size_t labeled_size = 0;
  std::vector<std::string> selected_ids;
  std::size_t ok_count = 0;
  std::size_t empty_count = 0;
  std::size_t omission_count = 0;
  std::optional<double> test_entity_accuracy;
  double mean_selected_entropy = 0.0;
  TokenUsage usage;
};

struct CostComparison {
  double human_total_usd = 0.0;
  double llm_total_usd = 0.0;
  std::optional<double> ratio;  // nullopt when the LLM cost is zero
  std::size_t annotated_sentences = 0;
  TokenUsage usage;
};

struct RunReport {
  LoopConfig config;
  std::size_t original_size = 0;
  std::optional<double> baseline_accuracy;
  std::vector<IterationRecord> iterations;
  std::optional<CostComparison> cost;
};

// Trains on the full gold training set and reports entity accuracy on the
// test split. Throws on an empty test set or one without entity tokens.
double run_baseline(const Corpus& train_set, const Corpus& test,
                    const TrainConfig& cfg);

// The full selection -> annotation -> retrain cycle. Seeds with a random
// seed_fraction of the training set, then per iteration scores the pool by
// mean token entropy, selects ceil(select_fraction * original size)
// sentences, annotates them, folds Ok annotations into the labeled set
// (failures return to the pool), retrains from scratch and evaluates.
// Fully deterministic for a given config; resuming from a checkpoint
// reproduces the uninterrupted run exactly.
RunReport run_active_learning(const Corpus& train_set, const Corpus& test,
                              const LoopConfig& cfg);

// (human cost per annotator) * annotators / llm cost; nullopt when the LLM
// side is zero.
std::optional<double> annotation_cost_ratio(double human_cost_per_annotator,
                                            int n_annotators, double llm_cost);

CostComparison estimate_cost(const RunReport& report, const CostModel& model);

// Deterministic serializations; rerunning an identical config yields
// byte-identical output. Filesystem paths are deliberately not part of the
// config snapshot.
std::string report_to_json(const RunReport& report);
std::string iterations_to_csv(const RunReport& report);
void write_report_json(const RunReport& report, const std::string& path);
void write_iterations_csv(const RunReport& report, const std::string& path);

}  // namespace alner
