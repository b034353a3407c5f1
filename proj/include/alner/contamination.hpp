#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alner/annotator.hpp"
#include "alner/corpus.hpp"

namespace alner {

struct ContaminationConfig {
  std::string dataset_name;
  std::vector<std::string> dataset_aliases;  // accepted answer strings
  std::size_t n_records = 30;
  int n_runs = 3;
  double temperature = 0.0;
  bool multilingual = false;
  std::size_t languages_per_dataset = 3;
  std::size_t records_per_language = 10;
  std::uint64_t seed = 0;
};

struct ContaminationReport {
  std::vector<std::size_t> per_run_correct;
  std::vector<double> per_run_score;
  double mean = 0.0;
  double stddev = 0.0;  // population std over runs
  std::size_t n_records = 0;
};

// Source-identification prompt; "multilingual" appears only for multilingual
// datasets.
std::string contamination_prompt(const Sentence& sample, bool multilingual);

// Case-insensitive, whitespace-trimmed match against the alias list.
bool answer_matches(const std::string& answer,
                    const std::vector<std::string>& aliases);

// Picks the record subset to probe: for multilingual configs, exactly
// records_per_language from each of languages_per_dataset randomly chosen
// languages; otherwise n_records drawn at random. Deterministic under seed.
std::vector<Sentence> stratify_samples(const std::vector<Sentence>& pool,
                                       const ContaminationConfig& cfg);

// Asks the annotator to name the source dataset of every sample, n_runs
// times, and reports the per-run fraction of correct identifications.
// Annotator failures count as incorrect.
ContaminationReport contamination_score(const std::vector<Sentence>& samples,
                                        AnnotatorBackend& backend,
                                        const ContaminationConfig& cfg);

struct IclProbe {
  std::string prompt;
  std::vector<std::string> prefix_tokens;
  std::vector<std::string> suffix_tokens;
};

// Splits the sample after ceil(split_fraction * n) tokens and builds a
// completion prompt for the remainder. Throws when the sentence is too short
// to split.
IclProbe build_icl_probe(const Sentence& sample, const std::string& dataset_name,
                         double split_fraction = 0.5);

enum class CompletionMatch { Exact, NearExact, NoMatch };

// Position-wise token agreement between two normalized token sequences,
// divided by the longer length.
double token_overlap(const std::vector<std::string>& a,
                     const std::vector<std::string>& b);

// Exact: normalized completion equals the normalized held-out suffix.
// NearExact: token overlap >= 0.8. Otherwise NoMatch.
CompletionMatch classify_completion(const std::string& completion,
                                    const std::vector<std::string>& suffix_tokens);

// Test double for the source-identification probe: answers with the true
// dataset name with probability correct_prob, otherwise with a wrong name.
// Deterministic per (seed, run, sample index within run).
class DatasetNameMock : public AnnotatorBackend {
 public:
  DatasetNameMock(std::string dataset_name, double correct_prob, std::uint64_t seed);

  CompletionResult complete(const CompletionRequest& request) override;

 private:
  std::string dataset_name_;
  double correct_prob_;
  std::uint64_t seed_;
};

}  // namespace alner
