#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alner/corpus.hpp"
#include "alner/sampling.hpp"

namespace alner {

// Hashed indicator features for one token position: identity, lowercased
// form, affixes up to length 3, word shape, boundary flags and neighbor
// tokens at offsets +-1 and +-2 (with boundary sentinels). Sorted, deduped
// hash ids into a fixed 2^20 slot space; collisions are accepted.
inline constexpr std::size_t kFeatureSpace = 1u << 20;

using FeatureVector = std::vector<std::uint32_t>;

// Human-readable feature strings, exposed for inspection and tests.
std::vector<std::string> featurize_strings(const Sentence& s, std::size_t i);

FeatureVector featurize(const Sentence& s, std::size_t i);

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.1;
  double lr_decay = 0.01;  // lr_e = learning_rate / (1 + lr_decay * epoch)
  double l2 = 1e-4;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

// Multinomial logistic regression over hashed features; the per-token
// probability source for entropy scoring. Trained from scratch on each call
// to train(); prediction is read-only and safe to share across threads.
class TaggerModel {
 public:
  TaggerModel();

  std::vector<TokenDistribution> predict_proba(const Sentence& s) const;
  std::vector<std::string> predict_labels(const Sentence& s) const;

  const TrainConfig& config() const { return config_; }
  const std::vector<double>& loss_curve() const { return loss_curve_; }

  void save(const std::string& path) const;
  static TaggerModel load(const std::string& path);

 private:
  friend TaggerModel train(const Corpus&, const TrainConfig&);

  std::vector<double> probabilities(const FeatureVector& fv) const;

  // feature-major layout: weights_[f * kNumLabels + c]
  std::vector<double> weights_;
  TrainConfig config_;
  std::vector<double> loss_curve_;  // mean cross-entropy per epoch
};

// Mini-batch gradient descent on cross-entropy with L2. Deterministic given
// (data, config): same call twice yields identical weights.
TaggerModel train(const Corpus& labeled, const TrainConfig& cfg);

// Compares the analytic gradient with central finite differences (h = 1e-5)
// on a small random instance; returns the max relative error over all
// touched coordinates.
double gradient_check(std::uint64_t seed = 0);

}  // namespace alner
