#include "alner/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "alner/error.hpp"
#include "alner/rng.hpp"

namespace alner {

TokenDistribution::TokenDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.size() != kNumLabels) {
    throw Error("TokenDistribution: expected " + std::to_string(kNumLabels) +
                " entries, got " + std::to_string(probs_.size()));
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error("TokenDistribution: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error("TokenDistribution: entries sum to " + std::to_string(sum));
  }
}

TokenDistribution TokenDistribution::uniform() {
  return TokenDistribution(
      std::vector<double>(kNumLabels, 1.0 / static_cast<double>(kNumLabels)));
}

double token_entropy(const TokenDistribution& d) {
  double h = 0.0;
  for (double p : d.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  const double max_h = std::log(static_cast<double>(kNumLabels));
  return std::clamp(h, 0.0, max_h);
}

double sample_entropy(const std::vector<TokenDistribution>& ds) {
  if (ds.empty()) throw Error("sample_entropy: empty distribution list");
  double sum = 0.0;
  for (const auto& d : ds) sum += token_entropy(d);
  return sum / static_cast<double>(ds.size());
}

std::vector<std::string> select_most_uncertain(std::vector<SampleEntropy> pool,
                                               double fraction,
                                               std::size_t base_size) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error("select_most_uncertain: fraction must be in (0, 1]");
  }
  if (pool.empty()) return {};
  std::size_t k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(base_size)));
  k = std::min(k, pool.size());
  std::sort(pool.begin(), pool.end(), [](const SampleEntropy& a, const SampleEntropy& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.sentence_id < b.sentence_id;
  });
  std::vector<std::string> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(pool[i].sentence_id);
  return ids;
}

double rank_weight(std::size_t index, std::size_t n) {
  const double mu = static_cast<double>(n) / 2.0;
  const double sigma = static_cast<double>(n) / 4.0;
  const double x = static_cast<double>(index) - mu;
  return std::exp(-(x * x) / (2.0 * sigma * sigma));
}

std::map<std::string, double> entity_class_shares(const Corpus& c) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : c.sentences) {
    if (!s.gold) continue;
    for (const auto& tag : *s.gold) {
      auto cls = entity_class_of(tag);
      if (cls) {
        ++counts[*cls];
        ++total;
      }
    }
  }
  std::map<std::string, double> shares;
  if (total == 0) return shares;
  for (const auto& [cls, n] : counts) {
    shares[cls] = static_cast<double>(n) / static_cast<double>(total);
  }
  return shares;
}

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b) {
  double sum = 0.0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    sum += std::abs(v - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : b) {
    if (a.find(k) == a.end()) sum += std::abs(v);
  }
  return 0.5 * sum;
}

BalancedSampleResult balanced_sample(const Corpus& corpus,
                                     const BalancedSamplerConfig& cfg) {
  if (!(cfg.min_proportion >= 0.0 && cfg.min_proportion < cfg.max_proportion &&
        cfg.max_proportion <= 1.0)) {
    throw Error("balanced_sample: require 0 <= min_proportion < max_proportion <= 1");
  }
  if (cfg.sample_size < 1) throw Error("balanced_sample: sample_size must be >= 1");

  // Step 1: proportion filter; sentences must carry gold labels.
  std::vector<const Sentence*> filtered;
  for (const auto& s : corpus.sentences) {
    if (entity_token_count(s) == 0) continue;
    const double p = entity_proportion(s);
    if (p >= cfg.min_proportion && p <= cfg.max_proportion) filtered.push_back(&s);
  }

  // Step 2: descending entity count, ties by ascending id.
  std::sort(filtered.begin(), filtered.end(), [](const Sentence* a, const Sentence* b) {
    const std::size_t ca = entity_token_count(*a);
    const std::size_t cb = entity_token_count(*b);
    if (ca != cb) return ca > cb;
    return a->id < b->id;
  });

  BalancedSampleResult result;
  result.filtered_size = filtered.size();
  result.sample.language = corpus.language;

  Corpus filtered_corpus;
  filtered_corpus.language = corpus.language;
  for (const Sentence* s : filtered) filtered_corpus.sentences.push_back(*s);
  result.pool_class_shares = entity_class_shares(filtered_corpus);

  if (filtered.size() <= cfg.sample_size) {
    result.sample = std::move(filtered_corpus);
    result.truncated = filtered.size() < cfg.sample_size;
    result.sample_class_shares = result.pool_class_shares;
    return result;
  }

  // Steps 3-4: Gaussian rank weights, normalized.
  const std::size_t n = filtered.size();
  std::vector<double> weights(n);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = rank_weight(i, n);
    wsum += weights[i];
  }
  for (double& w : weights) w /= wsum;

  // Step 5: weighted draw without replacement, renormalizing after each pick.
  Rng rng(cfg.seed);
  std::vector<bool> taken(n, false);
  double remaining = 1.0;
  for (std::size_t draw = 0; draw < cfg.sample_size; ++draw) {
    double x = rng.uniform() * remaining;
    std::size_t pick = n;  // sentinel
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      acc += weights[i];
      if (x < acc) {
        pick = i;
        break;
      }
    }
    if (pick == n) {
      // float round-off pushed x past the last cumulative weight
      for (std::size_t i = n; i-- > 0;) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    taken[pick] = true;
    remaining -= weights[pick];
    result.sample.sentences.push_back(*filtered[pick]);
  }

  result.sample_class_shares = entity_class_shares(result.sample);
  return result;
}

}  // namespace alner
