#include <doctest.h>

#include <cmath>
#include <map>

#include "alner/annotator.hpp"
#include "alner/contamination.hpp"
#include "alner/error.hpp"
#include "alner/synth.hpp"

using namespace alner;

namespace {

std::vector<Sentence> sample_pool(std::size_t n, std::uint64_t seed,
                                  const std::string& language = "syn") {
  SynthConfig cfg;
  cfg.n_sentences = n;
  cfg.seed = seed;
  cfg.language = language;
  cfg.id_prefix = language;
  auto corpus = generate_corpus(cfg);
  return corpus.sentences;
}

ContaminationConfig base_config() {
  ContaminationConfig cfg;
  cfg.dataset_name = "SynthNER";
  cfg.dataset_aliases = {"SynthNER", "SynthNER 2.0"};
  cfg.n_records = 30;
  cfg.n_runs = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("contamination") {

TEST_CASE("prompt wording toggles on the multilingual flag") {
  Sentence s;
  s.id = "x";
  s.tokens = {"Foo", "bar"};
  const std::string mono = contamination_prompt(s, false);
  const std::string multi = contamination_prompt(s, true);
  CHECK(mono == "Identify the source NER dataset for this sample. Respond with "
                "the dataset name alone. Foo bar");
  CHECK(multi == "Identify the source multilingual NER dataset for this sample. "
                 "Respond with the dataset name alone. Foo bar");
}

TEST_CASE("answer matching trims and case-folds") {
  const std::vector<std::string> aliases = {"SynthNER", "SynthNER 2.0"};
  CHECK(answer_matches("synthner", aliases));
  CHECK(answer_matches("  SynthNER 2.0\n", aliases));
  CHECK_FALSE(answer_matches("Synth NER", aliases));
  CHECK_FALSE(answer_matches("", aliases));
}

TEST_CASE("always-correct mock scores 1.0 with zero deviation") {
  const auto pool = sample_pool(40, 1);
  auto cfg = base_config();
  const auto samples = stratify_samples(pool, cfg);
  DatasetNameMock mock("SynthNER", 1.0, 0);
  const auto report = contamination_score(samples, mock, cfg);
  CHECK(report.mean == 1.0);
  CHECK(report.stddev == 0.0);
  for (auto c : report.per_run_correct) CHECK(c == 30);
}

TEST_CASE("never-correct mock scores 0.0") {
  const auto pool = sample_pool(40, 2);
  auto cfg = base_config();
  const auto samples = stratify_samples(pool, cfg);
  DatasetNameMock mock("SynthNER", 0.0, 0);
  const auto report = contamination_score(samples, mock, cfg);
  CHECK(report.mean == 0.0);
  CHECK(report.stddev == 0.0);
}

TEST_CASE("bernoulli mock stays inside the binomial 3-sigma band") {
  const auto pool = sample_pool(60, 3);
  auto cfg = base_config();
  cfg.seed = 11;
  const auto samples = stratify_samples(pool, cfg);
  DatasetNameMock mock("SynthNER", 0.94, 21);
  const auto report = contamination_score(samples, mock, cfg);
  const double band = 3.0 * std::sqrt(0.94 * 0.06 / 90.0);
  CHECK(report.mean >= 0.94 - band);
  CHECK(report.mean <= 0.94 + band);
  CHECK(report.n_records == 30);
}

TEST_CASE("score is deterministic under a deterministic annotator") {
  const auto pool = sample_pool(50, 4);
  auto cfg = base_config();
  const auto samples = stratify_samples(pool, cfg);
  DatasetNameMock a("SynthNER", 0.7, 5);
  DatasetNameMock b("SynthNER", 0.7, 5);
  const auto ra = contamination_score(samples, a, cfg);
  const auto rb = contamination_score(samples, b, cfg);
  CHECK(ra.per_run_correct == rb.per_run_correct);
  CHECK(ra.mean == rb.mean);
  CHECK(ra.stddev == rb.stddev);
}

TEST_CASE("annotator failures count as incorrect identifications") {
  struct DeadBackend : AnnotatorBackend {
    CompletionResult complete(const CompletionRequest&) override {
      CompletionResult r;
      r.transport_ok = false;
      r.error = "connection refused";
      return r;
    }
  };
  const auto pool = sample_pool(40, 5);
  auto cfg = base_config();
  const auto samples = stratify_samples(pool, cfg);
  DeadBackend dead;
  const auto report = contamination_score(samples, dead, cfg);
  CHECK(report.mean == 0.0);
  CHECK(report.stddev == 0.0);
}

TEST_CASE("multilingual stratification takes records_per_language per language") {
  std::vector<Sentence> pool;
  for (const auto* lang : {"xho", "ewe", "nya", "swa"}) {
    auto part = sample_pool(15, 7, lang);
    pool.insert(pool.end(), part.begin(), part.end());
  }
  auto cfg = base_config();
  cfg.multilingual = true;
  cfg.seed = 13;
  const auto samples = stratify_samples(pool, cfg);
  REQUIRE(samples.size() == 30);
  std::map<std::string, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.language];
  CHECK(counts.size() == 3);
  for (const auto& [lang, n] : counts) {
    CHECK(n == 10);
  }
}

TEST_CASE("stratification errors are explicit") {
  auto cfg = base_config();
  CHECK_THROWS_AS(stratify_samples(sample_pool(10, 1), cfg), Error);

  cfg.multilingual = true;
  cfg.records_per_language = 7;  // 3 * 7 != 30
  CHECK_THROWS_AS(stratify_samples(sample_pool(100, 1), cfg), Error);
}

TEST_CASE("icl probe splits at the documented point") {
  Sentence s;
  s.id = "p";
  for (int i = 0; i < 10; ++i) s.tokens.push_back("t" + std::to_string(i));
  const auto probe = build_icl_probe(s, "SynthNER");
  CHECK(probe.prefix_tokens.size() == 5);
  CHECK(probe.suffix_tokens.size() == 5);
  // prefix ++ suffix == original
  std::vector<std::string> joined = probe.prefix_tokens;
  joined.insert(joined.end(), probe.suffix_tokens.begin(), probe.suffix_tokens.end());
  CHECK(joined == s.tokens);
  CHECK(probe.prompt.find("SynthNER") != std::string::npos);
  CHECK(probe.prompt.find("t0 t1 t2 t3 t4") != std::string::npos);
  CHECK(probe.prompt.find("t5") == std::string::npos);

  Sentence tiny;
  tiny.id = "tiny";
  tiny.tokens = {"only"};
  CHECK_THROWS_WITH_AS(build_icl_probe(tiny, "SynthNER"),
                       doctest::Contains("too short"), Error);
}

TEST_CASE("completion classification") {
  const std::vector<std::string> suffix = {"t0", "t1", "t2", "t3", "t4",
                                           "t5", "t6", "t7", "t8", "t9"};
  CHECK(classify_completion("t0 t1 t2 t3 t4 t5 t6 t7 t8 t9", suffix) ==
        CompletionMatch::Exact);
  // case folding and whitespace collapsing
  CHECK(classify_completion("  T0  t1 t2 t3 t4 t5 t6 t7 t8 T9 ", suffix) ==
        CompletionMatch::Exact);
  // one of ten tokens changed -> overlap 0.9 -> near-exact
  CHECK(classify_completion("t0 t1 t2 t3 WRONG t5 t6 t7 t8 t9", suffix) ==
        CompletionMatch::NearExact);
  CHECK(classify_completion("something else entirely", suffix) ==
        CompletionMatch::NoMatch);
  // three of ten changed -> overlap 0.7 -> no match
  CHECK(classify_completion("x x x t3 t4 t5 t6 t7 t8 t9", suffix) ==
        CompletionMatch::NoMatch);
}

TEST_CASE("token overlap agrees with a hand computation") {
  CHECK(token_overlap({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"},
                      {"a", "b", "c", "d", "e", "f", "g", "h", "i", "x"}) ==
        doctest::Approx(0.9));
  CHECK(token_overlap({"a"}, {"a", "b"}) == doctest::Approx(0.5));
  CHECK(token_overlap({}, {}) == 1.0);
}

}  // TEST_SUITE
