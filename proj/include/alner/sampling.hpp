#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alner/corpus.hpp"
#include "alner/labels.hpp"

namespace alner {

// Probability vector over the 9 BIO classes for one token. Construction
// validates non-negativity and normalization, so downstream code can assume
// a proper distribution.
class TokenDistribution {
 public:
  explicit TokenDistribution(std::vector<double> probs);

  static TokenDistribution uniform();

  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Shannon entropy in nats, -sum p ln p with 0 ln 0 := 0. Result clamped to
// [0, ln 9] to absorb last-bit float noise at the boundaries.
double token_entropy(const TokenDistribution& d);

// Arithmetic mean of token entropies; the per-sentence acquisition score.
// Throws on an empty list.
double sample_entropy(const std::vector<TokenDistribution>& ds);

struct SampleEntropy {
  std::string sentence_id;
  double value = 0.0;
};

// Picks ceil(fraction * base_size) ids with the highest mean entropy, capped
// at the pool size. base_size is the original training-set size, not the
// current pool. Ties break toward the lexicographically smaller id.
std::vector<std::string> select_most_uncertain(std::vector<SampleEntropy> pool,
                                               double fraction,
                                               std::size_t base_size);

struct BalancedSamplerConfig {
  double min_proportion = 0.05;
  double max_proportion = 0.50;
  std::size_t sample_size = 50;
  std::uint64_t seed = 0;
};

// Pre-normalization Gaussian weight for the sentence at 0-based `index` of a
// filtered pool of size n, with mu = n/2 and sigma = n/4.
double rank_weight(std::size_t index, std::size_t n);

struct BalancedSampleResult {
  Corpus sample;
  std::size_t filtered_size = 0;
  // Set when the filtered pool was smaller than the requested sample size and
  // the whole pool was returned instead.
  bool truncated = false;
  std::map<std::string, double> pool_class_shares;
  std::map<std::string, double> sample_class_shares;
};

// Entity-balanced subsampling: keep sentences with at least one entity and an
// entity proportion inside [min, max], sort by descending entity count (ties
// by ascending id), weight ranks by a Gaussian centred on the middle of the
// sorted list, then draw sample_size sentences without replacement.
BalancedSampleResult balanced_sample(const Corpus& corpus,
                                     const BalancedSamplerConfig& cfg);

// Per-class share of entity tokens (PER/ORG/LOC/DATE sum to 1); empty map
// when the corpus has no entity tokens.
std::map<std::string, double> entity_class_shares(const Corpus& c);

// Total-variation distance between two share tables (missing keys count 0).
double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b);

}  // namespace alner
