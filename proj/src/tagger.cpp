#include "alner/tagger.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/labels.hpp"
#include "alner/rng.hpp"

namespace alner {

namespace {

using nlohmann::json;

std::string lowercased(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string word_shape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c > 127) {
      out += 'u';
    } else if (std::isupper(c)) {
      out += 'X';
    } else if (std::islower(c)) {
      out += 'x';
    } else if (std::isdigit(c)) {
      out += 'd';
    } else {
      out += '.';
    }
  }
  return out;
}

const std::string& neighbor(const Sentence& s, std::ptrdiff_t i) {
  static const std::string kBos = "<s>";
  static const std::string kEos = "</s>";
  if (i < 0) return kBos;
  if (i >= static_cast<std::ptrdiff_t>(s.tokens.size())) return kEos;
  return s.tokens[static_cast<std::size_t>(i)];
}

struct TokenInstance {
  FeatureVector features;
  std::size_t gold_class;
};

std::vector<double> softmax_scores(const std::vector<double>& scores) {
  std::vector<double> probs(scores.size());
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    probs[c] = std::exp(scores[c] - m);
    sum += probs[c];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

}  // namespace

std::vector<std::string> featurize_strings(const Sentence& s, std::size_t i) {
  if (i >= s.tokens.size()) throw Error("featurize: token index out of range");
  const std::string& tok = s.tokens[i];
  std::vector<std::string> feats;
  feats.reserve(16);
  feats.push_back("w0=" + tok);
  feats.push_back("lw0=" + lowercased(tok));
  for (std::size_t k = 1; k <= 3 && k <= tok.size(); ++k) {
    feats.push_back("pre" + std::to_string(k) + "=" + tok.substr(0, k));
    feats.push_back("suf" + std::to_string(k) + "=" + tok.substr(tok.size() - k));
  }
  feats.push_back("shape=" + word_shape(tok));
  if (i == 0) feats.push_back("first");
  if (i + 1 == s.tokens.size()) feats.push_back("last");
  const auto p = static_cast<std::ptrdiff_t>(i);
  feats.push_back("w-1=" + neighbor(s, p - 1));
  feats.push_back("w+1=" + neighbor(s, p + 1));
  feats.push_back("w-2=" + neighbor(s, p - 2));
  feats.push_back("w+2=" + neighbor(s, p + 2));
  return feats;
}

FeatureVector featurize(const Sentence& s, std::size_t i) {
  FeatureVector fv;
  for (const auto& f : featurize_strings(s, i)) {
    fv.push_back(static_cast<std::uint32_t>(fnv1a(f) & (kFeatureSpace - 1)));
  }
  std::sort(fv.begin(), fv.end());
  fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
  return fv;
}

TaggerModel::TaggerModel() : weights_(kFeatureSpace * kNumLabels, 0.0) {}

std::vector<double> TaggerModel::probabilities(const FeatureVector& fv) const {
  std::vector<double> scores(kNumLabels, 0.0);
  for (std::uint32_t f : fv) {
    const double* row = &weights_[static_cast<std::size_t>(f) * kNumLabels];
    for (std::size_t c = 0; c < kNumLabels; ++c) scores[c] += row[c];
  }
  return softmax_scores(scores);
}

std::vector<TokenDistribution> TaggerModel::predict_proba(const Sentence& s) const {
  std::vector<TokenDistribution> out;
  out.reserve(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    out.emplace_back(probabilities(featurize(s, i)));
  }
  return out;
}

std::vector<std::string> TaggerModel::predict_labels(const Sentence& s) const {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto probs = probabilities(featurize(s, i));
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) -
                                 probs.begin());
    out.push_back(std::string(kLabels[best]));
  }
  return out;
}

TaggerModel train(const Corpus& labeled, const TrainConfig& cfg) {
  if (labeled.sentences.empty()) throw Error("train: empty corpus");
  if (cfg.epochs < 1) throw Error("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error("train: batch_size must be >= 1");

  std::vector<TokenInstance> instances;
  for (const auto& s : labeled.sentences) {
    if (!s.gold) throw Error("train: sentence '" + s.id + "' has no gold labels");
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto cls = label_index((*s.gold)[i]);
      if (!cls) throw Error("train: unknown tag '" + (*s.gold)[i] + "'");
      instances.push_back({featurize(s, i), *cls});
    }
  }

  TaggerModel model;
  model.config_ = cfg;
  std::vector<double>& w = model.weights_;
  // Effective weight = scale * w; the L2 shrink multiplies scale instead of
  // touching every coordinate.
  double scale = 1.0;

  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  // gradient accumulator per batch: feature slot -> per-class sums
  std::unordered_map<std::uint32_t, std::array<double, kNumLabels>> grad;
  grad.reserve(1024);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        cfg.learning_rate / (1.0 + cfg.lr_decay * static_cast<double>(epoch));
    if (cfg.shuffle) {
      Rng rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
      rng.shuffle(order);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      grad.clear();
      for (std::size_t k = start; k < end; ++k) {
        const TokenInstance& inst = instances[order[k]];
        std::vector<double> scores(kNumLabels, 0.0);
        for (std::uint32_t f : inst.features) {
          const double* row = &w[static_cast<std::size_t>(f) * kNumLabels];
          for (std::size_t c = 0; c < kNumLabels; ++c) scores[c] += scale * row[c];
        }
        const auto probs = softmax_scores(scores);
        for (std::uint32_t f : inst.features) {
          auto& g = grad[f];
          for (std::size_t c = 0; c < kNumLabels; ++c) {
            g[c] += (probs[c] - (c == inst.gold_class ? 1.0 : 0.0)) * inv_batch;
          }
        }
      }
      scale *= 1.0 - lr * cfg.l2;
      for (const auto& [f, g] : grad) {
        double* row = &w[static_cast<std::size_t>(f) * kNumLabels];
        for (std::size_t c = 0; c < kNumLabels; ++c) {
          row[c] -= lr * g[c] / scale;
        }
      }
    }

    // full-data mean cross-entropy with the epoch's final weights
    double loss = 0.0;
    for (const TokenInstance& inst : instances) {
      std::vector<double> scores(kNumLabels, 0.0);
      for (std::uint32_t f : inst.features) {
        const double* row = &w[static_cast<std::size_t>(f) * kNumLabels];
        for (std::size_t c = 0; c < kNumLabels; ++c) scores[c] += scale * row[c];
      }
      const auto probs = softmax_scores(scores);
      loss -= std::log(std::max(probs[inst.gold_class], 1e-300));
    }
    model.loss_curve_.push_back(loss / static_cast<double>(instances.size()));
  }

  // fold the scale back into the stored weights
  if (scale != 1.0) {
    for (double& x : w) x *= scale;
  }
  return model;
}

double gradient_check(std::uint64_t seed) {
  // Small random instance over a compact remapped feature space.
  Rng rng(derive_seed(seed, "gradient-check"));
  std::vector<Sentence> sentences;
  for (int si = 0; si < 3; ++si) {
    Sentence s;
    s.id = "g" + std::to_string(si);
    const std::size_t len = 3 + rng.index(3);
    std::vector<std::string> gold;
    for (std::size_t i = 0; i < len; ++i) {
      std::string tok = "tok" + std::to_string(rng.index(40));
      if (rng.bernoulli(0.5)) tok[0] = static_cast<char>(std::toupper(tok[0]));
      s.tokens.push_back(std::move(tok));
      gold.push_back(std::string(kLabels[rng.index(kNumLabels)]));
    }
    s.gold = gold;
    sentences.push_back(std::move(s));
  }

  struct Inst {
    std::vector<std::size_t> features;  // compact ids
    std::size_t gold_class;
  };
  std::unordered_map<std::uint32_t, std::size_t> remap;
  std::vector<Inst> instances;
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      Inst inst;
      for (std::uint32_t f : featurize(s, i)) {
        auto [it, _] = remap.emplace(f, remap.size());
        inst.features.push_back(it->second);
      }
      inst.gold_class = *label_index((*s.gold)[i]);
      instances.push_back(std::move(inst));
    }
  }

  const std::size_t n_features = remap.size();
  const std::size_t dim = n_features * kNumLabels;
  const double l2 = 1e-3;
  std::vector<double> w(dim);
  for (double& x : w) x = rng.uniform_range(-0.5, 0.5);

  auto objective = [&](const std::vector<double>& wv) {
    double loss = 0.0;
    for (const auto& inst : instances) {
      std::vector<double> scores(kNumLabels, 0.0);
      for (std::size_t f : inst.features) {
        for (std::size_t c = 0; c < kNumLabels; ++c) {
          scores[c] += wv[f * kNumLabels + c];
        }
      }
      const auto probs = softmax_scores(scores);
      loss -= std::log(std::max(probs[inst.gold_class], 1e-300));
    }
    loss /= static_cast<double>(instances.size());
    double reg = 0.0;
    for (double x : wv) reg += x * x;
    return loss + 0.5 * l2 * reg;
  };

  // analytic gradient of the same objective
  std::vector<double> analytic(dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(instances.size());
  for (const auto& inst : instances) {
    std::vector<double> scores(kNumLabels, 0.0);
    for (std::size_t f : inst.features) {
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        scores[c] += w[f * kNumLabels + c];
      }
    }
    const auto probs = softmax_scores(scores);
    for (std::size_t f : inst.features) {
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        analytic[f * kNumLabels + c] +=
            (probs[c] - (c == inst.gold_class ? 1.0 : 0.0)) * inv_n;
      }
    }
  }
  for (std::size_t j = 0; j < dim; ++j) analytic[j] += l2 * w[j];

  const double h = 1e-5;
  double max_rel = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double orig = w[j];
    w[j] = orig + h;
    const double up = objective(w);
    w[j] = orig - h;
    const double down = objective(w);
    w[j] = orig;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[j]), std::abs(fd), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic[j] - fd) / denom);
  }
  return max_rel;
}

void TaggerModel::save(const std::string& path) const {
  json doc;
  doc["format_version"] = 1;
  doc["config"] = {{"epochs", config_.epochs},
                   {"learning_rate", config_.learning_rate},
                   {"lr_decay", config_.lr_decay},
                   {"l2", config_.l2},
                   {"batch_size", config_.batch_size},
                   {"seed", config_.seed},
                   {"shuffle", config_.shuffle}};
  doc["loss_curve"] = loss_curve_;
  json weights = json::array();
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (weights_[j] != 0.0) {
      weights.push_back(json::array({j, weights_[j]}));
    }
  }
  doc["weights"] = std::move(weights);
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << doc.dump() << '\n';
}

TaggerModel TaggerModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("format_version", 0) != 1) {
    throw Error("model file '" + path + "': unsupported format");
  }
  TaggerModel model;
  const json& c = doc.at("config");
  model.config_.epochs = c.value("epochs", 30);
  model.config_.learning_rate = c.value("learning_rate", 0.1);
  model.config_.lr_decay = c.value("lr_decay", 0.01);
  model.config_.l2 = c.value("l2", 1e-4);
  model.config_.batch_size = c.value("batch_size", 32);
  model.config_.seed = c.value("seed", std::uint64_t{0});
  model.config_.shuffle = c.value("shuffle", true);
  model.loss_curve_ = doc.value("loss_curve", std::vector<double>{});
  for (const auto& entry : doc.at("weights")) {
    const std::size_t j = entry.at(0).get<std::size_t>();
    if (j >= model.weights_.size()) throw Error("model file: weight index out of range");
    model.weights_[j] = entry.at(1).get<double>();
  }
  return model;
}

}  // namespace alner
