#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "alner/error.hpp"
#include "alner/rng.hpp"
#include "alner/sampling.hpp"
#include "alner/synth.hpp"

using namespace alner;

namespace {

constexpr double kLn9 = 2.1972245773362196;

TokenDistribution one_hot(std::size_t i) {
  std::vector<double> p(kNumLabels, 0.0);
  p[i] = 1.0;
  return TokenDistribution(p);
}

TokenDistribution random_simplex(Rng& rng) {
  std::vector<double> p(kNumLabels);
  double sum = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  for (double& x : p) x /= sum;
  return TokenDistribution(p);
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("token entropy of uniform distribution is ln 9") {
  CHECK(token_entropy(TokenDistribution::uniform()) ==
        doctest::Approx(kLn9).epsilon(1e-12));
}

TEST_CASE("token entropy of one-hot is zero") {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    CHECK(token_entropy(one_hot(i)) == 0.0);
  }
}

TEST_CASE("token entropy of a fair two-outcome split is ln 2") {
  std::vector<double> p(kNumLabels, 0.0);
  p[0] = 0.5;
  p[1] = 0.5;
  CHECK(token_entropy(TokenDistribution(p)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy bounds and permutation invariance over random simplex points") {
  Rng rng(101);
  for (int i = 0; i < 2000; ++i) {
    auto d = random_simplex(rng);
    const double h = token_entropy(d);
    CHECK(h >= 0.0);
    CHECK(h <= kLn9);
    auto probs = d.probs();
    std::vector<std::size_t> perm(kNumLabels);
    for (std::size_t j = 0; j < kNumLabels; ++j) perm[j] = j;
    rng.shuffle(perm);
    std::vector<double> shuffled(kNumLabels);
    for (std::size_t j = 0; j < kNumLabels; ++j) shuffled[j] = probs[perm[j]];
    CHECK(token_entropy(TokenDistribution(shuffled)) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("distribution construction rejects bad input") {
  CHECK_THROWS_AS(TokenDistribution(std::vector<double>(4, 0.25)), Error);
  std::vector<double> negative(kNumLabels, 0.15);
  negative[0] = -0.05;
  CHECK_THROWS_AS((TokenDistribution{negative}), Error);
  std::vector<double> unnormalized(kNumLabels, 0.2);
  CHECK_THROWS_AS((TokenDistribution{unnormalized}), Error);
}

TEST_CASE("sample entropy is the mean of token entropies") {
  CHECK(sample_entropy({one_hot(0), one_hot(3)}) == 0.0);
  std::vector<double> half(kNumLabels, 0.0);
  half[0] = 0.5;
  half[1] = 0.5;
  // token entropies 0 and ln 2 -> mean 0.34657
  CHECK(sample_entropy({one_hot(0), TokenDistribution(half)}) ==
        doctest::Approx(0.34657359027997264).epsilon(1e-12));
  CHECK(sample_entropy({TokenDistribution::uniform()}) ==
        doctest::Approx(kLn9).epsilon(1e-12));
  CHECK_THROWS_AS(sample_entropy({}), Error);
}

TEST_CASE("select_most_uncertain sizing and ordering") {
  std::vector<SampleEntropy> pool = {
      {"s3", 0.5}, {"s1", 2.0}, {"s2", 1.0}, {"s4", 0.1}};
  // 40-sentence base at 5 % -> k = 2
  auto ids = select_most_uncertain(pool, 0.05, 40);
  CHECK(ids == std::vector<std::string>{"s1", "s2"});

  // pool of 1 with a larger k returns the single id
  auto one = select_most_uncertain({{"only", 0.7}}, 0.5, 10);
  CHECK(one == std::vector<std::string>{"only"});

  // equal entropy breaks ties toward the smaller id
  auto tie = select_most_uncertain({{"b", 1.0}, {"a", 1.0}}, 0.05, 20);
  CHECK(tie == std::vector<std::string>{"a"});

  CHECK(select_most_uncertain({}, 0.05, 100).empty());
}

TEST_CASE("select_most_uncertain matches a brute-force full sort") {
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SampleEntropy> pool;
    const std::size_t n = 1 + rng.index(60);
    for (std::size_t i = 0; i < n; ++i) {
      pool.push_back({"s" + std::to_string(i), rng.uniform() * 2.2});
    }
    const std::size_t base = 1 + rng.index(200);
    const double fraction = 0.01 + 0.3 * rng.uniform();
    auto got = select_most_uncertain(pool, fraction, base);

    auto sorted = pool;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      if (a.value != b.value) return a.value > b.value;
      return a.sentence_id < b.sentence_id;
    });
    std::size_t k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(base)));
    k = std::min(k, pool.size());
    REQUIRE(got.size() == k);
    for (std::size_t i = 0; i < k; ++i) CHECK(got[i] == sorted[i].sentence_id);
    // no duplicates
    auto unique_check = got;
    std::sort(unique_check.begin(), unique_check.end());
    CHECK(std::adjacent_find(unique_check.begin(), unique_check.end()) ==
          unique_check.end());
  }
}

TEST_CASE("rank weight hits the documented Gaussian points") {
  CHECK(rank_weight(50, 100) == 1.0);
  CHECK(rank_weight(75, 100) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(rank_weight(25, 100) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("balanced sample respects the proportion filter") {
  SynthConfig synth;
  synth.n_sentences = 800;
  synth.seed = 11;
  const Corpus corpus = generate_corpus(synth);

  BalancedSamplerConfig cfg;
  cfg.sample_size = 50;
  cfg.seed = 3;
  const auto result = balanced_sample(corpus, cfg);
  REQUIRE(result.sample.size() == 50);
  CHECK_FALSE(result.truncated);
  for (const auto& s : result.sample.sentences) {
    CHECK(entity_token_count(s) >= 1);
    const double p = entity_proportion(s);
    CHECK(p >= cfg.min_proportion);
    CHECK(p <= cfg.max_proportion);
  }
}

TEST_CASE("a sentence below the minimum proportion is excluded") {
  Corpus corpus;
  corpus.language = "syn";
  Sentence dilute;
  dilute.id = "dilute";
  dilute.language = "syn";
  std::vector<std::string> gold;
  for (int i = 0; i < 25; ++i) {
    dilute.tokens.push_back("w" + std::to_string(i));
    gold.push_back(i == 0 ? "B-PER" : "O");  // p = 0.04
  }
  dilute.gold = gold;
  corpus.sentences.push_back(dilute);

  BalancedSamplerConfig cfg;
  cfg.sample_size = 5;
  const auto result = balanced_sample(corpus, cfg);
  CHECK(result.filtered_size == 0);
  CHECK(result.sample.empty());
  CHECK(result.truncated);
}

TEST_CASE("balanced sample is deterministic under the seed") {
  SynthConfig synth;
  synth.n_sentences = 500;
  synth.seed = 4;
  const Corpus corpus = generate_corpus(synth);
  BalancedSamplerConfig cfg;
  cfg.sample_size = 30;
  cfg.seed = 17;
  const auto a = balanced_sample(corpus, cfg);
  const auto b = balanced_sample(corpus, cfg);
  CHECK(a.sample == b.sample);
  cfg.seed = 18;
  const auto c = balanced_sample(corpus, cfg);
  CHECK(a.sample.sentences.size() == c.sample.sentences.size());
}

TEST_CASE("truncation returns the whole filtered pool with a warning") {
  SynthConfig synth;
  synth.n_sentences = 30;
  synth.seed = 9;
  const Corpus corpus = generate_corpus(synth);
  BalancedSamplerConfig cfg;
  cfg.sample_size = 500;
  const auto result = balanced_sample(corpus, cfg);
  CHECK(result.truncated);
  CHECK(result.sample.size() == result.filtered_size);
}

TEST_CASE("sampled class shares stay close to the filtered pool") {
  SynthConfig synth;
  synth.n_sentences = 2000;
  synth.seed = 21;
  const Corpus corpus = generate_corpus(synth);

  BalancedSamplerConfig cfg;
  cfg.sample_size = 50;
  std::map<std::string, double> mean_shares;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const auto result = balanced_sample(corpus, cfg);
    for (const auto& [cls, share] : result.sample_class_shares) {
      mean_shares[cls] += share / seeds;
    }
  }
  cfg.seed = 0;
  const auto pool_shares = balanced_sample(corpus, cfg).pool_class_shares;
  CHECK(total_variation(mean_shares, pool_shares) <= 0.15);
}

}  // TEST_SUITE
