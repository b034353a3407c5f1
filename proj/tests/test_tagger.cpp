#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/rng.hpp"
#include "alner/sampling.hpp"
#include "alner/synth.hpp"
#include "alner/tagger.hpp"

using namespace alner;

namespace {

constexpr double kLn9 = 2.1972245773362196;

Sentence sentence_from(std::vector<std::string> tokens,
                       std::vector<std::string> gold) {
  Sentence s;
  s.id = "t";
  s.language = "syn";
  s.tokens = std::move(tokens);
  s.gold = std::move(gold);
  return s;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_SUITE("tagger") {

TEST_CASE("featurize emits the documented indicator features") {
  const Sentence s = sentence_from({"Passau", "is", "old"}, {"B-LOC", "O", "O"});
  const auto feats = featurize_strings(s, 0);
  CHECK(contains(feats, "shape=Xxxxxx"));
  CHECK(contains(feats, "first"));
  CHECK(contains(feats, "suf3=sau"));
  CHECK(contains(feats, "pre2=Pa"));
  CHECK(contains(feats, "w0=Passau"));
  CHECK(contains(feats, "lw0=passau"));
  CHECK(contains(feats, "w+1=is"));
  CHECK(contains(feats, "w-1=<s>"));
  CHECK(contains(feats, "w+2=old"));
  CHECK_FALSE(contains(feats, "last"));
}

TEST_CASE("identical token and context give identical vectors") {
  const Sentence a = sentence_from({"x", "Mid", "y"}, {"O", "O", "O"});
  const Sentence b = sentence_from({"x", "Mid", "y"}, {"O", "O", "O"});
  CHECK(featurize(a, 1) == featurize(b, 1));
  CHECK(featurize_strings(a, 1) == featurize_strings(b, 1));
}

TEST_CASE("one-token sentence is both first and last") {
  const Sentence s = sentence_from({"Solo"}, {"O"});
  const auto feats = featurize_strings(s, 0);
  CHECK(contains(feats, "first"));
  CHECK(contains(feats, "last"));
  CHECK(contains(feats, "w-1=<s>"));
  CHECK(contains(feats, "w+1=</s>"));
}

TEST_CASE("feature ids stay inside the hash space") {
  SynthConfig cfg;
  cfg.n_sentences = 50;
  cfg.seed = 3;
  const Corpus c = generate_corpus(cfg);
  for (const auto& s : c.sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto fv = featurize(s, i);
      CHECK(std::is_sorted(fv.begin(), fv.end()));
      for (auto f : fv) CHECK(f < kFeatureSpace);
    }
  }
}

TEST_CASE("training twice with the same data and seed is bit-identical") {
  SynthConfig cfg;
  cfg.n_sentences = 30;
  cfg.seed = 5;
  const Corpus c = generate_corpus(cfg);
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 9;
  const TaggerModel a = train(c, tc);
  const TaggerModel b = train(c, tc);
  REQUIRE(a.loss_curve() == b.loss_curve());
  const Sentence& probe = c.sentences[0];
  const auto pa = a.predict_proba(probe);
  const auto pb = b.predict_proba(probe);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].probs() == pb[i].probs());
  }
}

TEST_CASE("loss decreases across epochs on a small set") {
  SynthConfig cfg;
  cfg.n_sentences = 10;
  cfg.seed = 6;
  const Corpus c = generate_corpus(cfg);
  TrainConfig tc;
  tc.epochs = 30;
  tc.seed = 1;
  const TaggerModel model = train(c, tc);
  const auto& curve = model.loss_curve();
  REQUIRE(curve.size() == 30);
  int improved = 0;
  for (std::size_t e = 1; e < curve.size(); ++e) {
    if (curve[e] <= curve[e - 1]) ++improved;
  }
  CHECK(improved >= 26);  // >= 90 % of epoch transitions
  CHECK(curve.back() < curve.front());
}

TEST_CASE("linearly separable toy data reaches 100 % training accuracy") {
  // distinct token inventories per class make the problem separable on
  // token-identity features alone
  Corpus c;
  c.language = "syn";
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    Sentence s;
    s.id = "sep:" + std::to_string(i);
    s.language = "syn";
    std::vector<std::string> gold;
    for (int t = 0; t < 6; ++t) {
      if (rng.bernoulli(0.4)) {
        s.tokens.push_back("Name" + std::to_string(rng.index(10)));
        gold.push_back("B-PER");
      } else {
        s.tokens.push_back("word" + std::to_string(rng.index(10)));
        gold.push_back("O");
      }
    }
    s.gold = gold;
    c.sentences.push_back(std::move(s));
  }

  TrainConfig tc;
  tc.epochs = 40;
  tc.seed = 2;
  const TaggerModel model = train(c, tc);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& s : c.sentences) {
    const auto pred = model.predict_labels(s);
    for (std::size_t t = 0; t < pred.size(); ++t) {
      ++total;
      if (pred[t] == (*s.gold)[t]) ++correct;
    }
  }
  CHECK(correct == total);
}

TEST_CASE("predict_proba rows are valid distributions") {
  SynthConfig cfg;
  cfg.n_sentences = 20;
  cfg.seed = 7;
  const Corpus c = generate_corpus(cfg);
  TrainConfig tc;
  tc.epochs = 3;
  const TaggerModel model = train(c, tc);
  for (const auto& s : c.sentences) {
    const auto dists = model.predict_proba(s);
    REQUIRE(dists.size() == s.tokens.size());
    for (const auto& d : dists) {
      double sum = 0.0;
      for (double p : d.probs()) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("shifting all class scores of a feature leaves distributions unchanged") {
  const Sentence s = sentence_from({"Probe"}, {"O"});
  const auto fv = featurize(s, 0);
  REQUIRE(!fv.empty());

  auto write_model = [&](const std::string& path, double shift) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["config"] = {{"epochs", 1},      {"learning_rate", 0.1},
                     {"lr_decay", 0.01}, {"l2", 1e-4},
                     {"batch_size", 32}, {"seed", 0},
                     {"shuffle", true}};
    doc["loss_curve"] = std::vector<double>{};
    nlohmann::json weights = nlohmann::json::array();
    Rng rng(5);
    for (std::size_t k = 0; k < fv.size(); ++k) {
      for (std::size_t c = 0; c < kNumLabels; ++c) {
        double w = rng.uniform_range(-1.0, 1.0);
        if (k == 0) w += shift;  // constant added to every class of one feature
        weights.push_back(nlohmann::json::array(
            {static_cast<std::size_t>(fv[k]) * kNumLabels + c, w}));
      }
    }
    doc["weights"] = std::move(weights);
    std::ofstream out(path);
    out << doc.dump();
  };

  const auto base_path =
      (std::filesystem::temp_directory_path() / "shift_base.json").string();
  const auto shifted_path =
      (std::filesystem::temp_directory_path() / "shift_plus.json").string();
  write_model(base_path, 0.0);
  write_model(shifted_path, 3.25);

  const auto base = TaggerModel::load(base_path).predict_proba(s);
  const auto shifted = TaggerModel::load(shifted_path).predict_proba(s);
  REQUIRE(base.size() == 1);
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    CHECK(shifted[0].probs()[c] == doctest::Approx(base[0].probs()[c]).epsilon(1e-12));
  }
}

TEST_CASE("untrained model predicts uniform distributions with entropy ln 9") {
  const TaggerModel model;
  const Sentence s = sentence_from({"anything", "Goes", "2021"}, {"O", "O", "O"});
  for (const auto& d : model.predict_proba(s)) {
    CHECK(token_entropy(d) == doctest::Approx(kLn9).epsilon(1e-12));
    for (double p : d.probs()) CHECK(p == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central finite differences") {
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    CHECK(gradient_check(seed) <= 1e-4);
  }
}

TEST_CASE("model save/load round trip preserves predictions") {
  SynthConfig cfg;
  cfg.n_sentences = 15;
  cfg.seed = 8;
  const Corpus c = generate_corpus(cfg);
  TrainConfig tc;
  tc.epochs = 4;
  tc.seed = 3;
  const TaggerModel model = train(c, tc);

  const auto path =
      (std::filesystem::temp_directory_path() / "tagger_model.json").string();
  model.save(path);
  const TaggerModel back = TaggerModel::load(path);
  CHECK(back.loss_curve() == model.loss_curve());
  CHECK(back.config().seed == tc.seed);
  for (const auto& s : c.sentences) {
    CHECK(back.predict_labels(s) == model.predict_labels(s));
    const auto pa = model.predict_proba(s);
    const auto pb = back.predict_proba(s);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      for (std::size_t k = 0; k < kNumLabels; ++k) {
        CHECK(pa[i].probs()[k] == doctest::Approx(pb[i].probs()[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("training rejects unusable input") {
  Corpus empty;
  CHECK_THROWS_AS(train(empty, TrainConfig{}), Error);
  Corpus no_gold;
  Sentence s;
  s.id = "x";
  s.tokens = {"a"};
  s.language = "syn";
  no_gold.sentences.push_back(s);
  CHECK_THROWS_AS(train(no_gold, TrainConfig{}), Error);
}

}  // TEST_SUITE
