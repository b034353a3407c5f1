#include "alner/contamination.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "alner/error.hpp"
#include "alner/rng.hpp"

namespace alner {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string casefold(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_normalize(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(casefold(tok));
  return out;
}

}  // namespace

std::string contamination_prompt(const Sentence& sample, bool multilingual) {
  std::string p = "Identify the source ";
  if (multilingual) p += "multilingual ";
  p += "NER dataset for this sample. Respond with the dataset name alone. ";
  p += join_tokens(sample.tokens);
  return p;
}

bool answer_matches(const std::string& answer,
                    const std::vector<std::string>& aliases) {
  const std::string norm = casefold(trimmed(answer));
  for (const auto& alias : aliases) {
    if (norm == casefold(trimmed(alias))) return true;
  }
  return false;
}

std::vector<Sentence> stratify_samples(const std::vector<Sentence>& pool,
                                       const ContaminationConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "stratify"));
  if (!cfg.multilingual) {
    if (pool.size() < cfg.n_records) {
      throw Error("stratify_samples: pool smaller than n_records");
    }
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<Sentence> out;
    for (std::size_t i = 0; i < cfg.n_records; ++i) out.push_back(pool[idx[i]]);
    return out;
  }

  if (cfg.languages_per_dataset * cfg.records_per_language != cfg.n_records) {
    throw Error("stratify_samples: languages_per_dataset * records_per_language "
                "must equal n_records");
  }
  std::map<std::string, std::vector<std::size_t>> by_language;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    by_language[pool[i].language].push_back(i);
  }
  std::vector<std::string> eligible;
  for (const auto& [lang, ids] : by_language) {
    if (ids.size() >= cfg.records_per_language) eligible.push_back(lang);
  }
  if (eligible.size() < cfg.languages_per_dataset) {
    throw Error("stratify_samples: need " + std::to_string(cfg.languages_per_dataset) +
                " languages with >= " + std::to_string(cfg.records_per_language) +
                " records each");
  }
  rng.shuffle(eligible);
  std::vector<Sentence> out;
  for (std::size_t l = 0; l < cfg.languages_per_dataset; ++l) {
    auto ids = by_language[eligible[l]];
    rng.shuffle(ids);
    for (std::size_t i = 0; i < cfg.records_per_language; ++i) {
      out.push_back(pool[ids[i]]);
    }
  }
  return out;
}

ContaminationReport contamination_score(const std::vector<Sentence>& samples,
                                        AnnotatorBackend& backend,
                                        const ContaminationConfig& cfg) {
  if (samples.empty()) throw Error("contamination_score: no samples");
  if (cfg.n_runs < 1) throw Error("contamination_score: n_runs must be >= 1");

  std::vector<std::string> aliases = cfg.dataset_aliases;
  if (std::find(aliases.begin(), aliases.end(), cfg.dataset_name) == aliases.end()) {
    aliases.push_back(cfg.dataset_name);
  }

  ContaminationReport report;
  report.n_records = samples.size();
  for (int run = 0; run < cfg.n_runs; ++run) {
    std::size_t correct = 0;
    for (const auto& sample : samples) {
      CompletionRequest req;
      req.prompt = contamination_prompt(sample, cfg.multilingual);
      req.temperature = cfg.temperature;
      req.sentences = {sample};
      req.round = run;
      const CompletionResult res = backend.complete(req);
      if (res.transport_ok && answer_matches(res.text, aliases)) ++correct;
    }
    report.per_run_correct.push_back(correct);
    report.per_run_score.push_back(static_cast<double>(correct) /
                                   static_cast<double>(samples.size()));
  }

  double sum = 0.0;
  for (double s : report.per_run_score) sum += s;
  report.mean = sum / static_cast<double>(cfg.n_runs);
  double var = 0.0;
  for (double s : report.per_run_score) {
    var += (s - report.mean) * (s - report.mean);
  }
  report.stddev = std::sqrt(var / static_cast<double>(cfg.n_runs));
  return report;
}

IclProbe build_icl_probe(const Sentence& sample, const std::string& dataset_name,
                         double split_fraction) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw Error("build_icl_probe: split_fraction must be in (0, 1)");
  }
  const std::size_t n = sample.tokens.size();
  if (n < 2) throw Error("build_icl_probe: sentence '" + sample.id + "' too short to split");
  std::size_t cut = static_cast<std::size_t>(
      std::ceil(split_fraction * static_cast<double>(n)));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);

  IclProbe probe;
  probe.prefix_tokens.assign(sample.tokens.begin(),
                             sample.tokens.begin() + static_cast<std::ptrdiff_t>(cut));
  probe.suffix_tokens.assign(sample.tokens.begin() + static_cast<std::ptrdiff_t>(cut),
                             sample.tokens.end());
  probe.prompt = "The following is the beginning of a sentence from the " +
                 dataset_name +
                 " dataset. Complete the sentence with its exact continuation and "
                 "respond with the continuation alone. " +
                 join_tokens(probe.prefix_tokens);
  return probe;
}

double token_overlap(const std::vector<std::string>& a,
                     const std::vector<std::string>& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const std::size_t shared = std::min(a.size(), b.size());
  std::size_t matches = 0;
  for (std::size_t i = 0; i < shared; ++i) {
    if (casefold(a[i]) == casefold(b[i])) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(longest);
}

CompletionMatch classify_completion(const std::string& completion,
                                    const std::vector<std::string>& suffix_tokens) {
  const auto got = split_normalize(completion);
  std::vector<std::string> want;
  want.reserve(suffix_tokens.size());
  for (const auto& t : suffix_tokens) want.push_back(casefold(t));
  if (got == want) return CompletionMatch::Exact;
  if (token_overlap(got, want) >= 0.8) return CompletionMatch::NearExact;
  return CompletionMatch::NoMatch;
}

DatasetNameMock::DatasetNameMock(std::string dataset_name, double correct_prob,
                                 std::uint64_t seed)
    : dataset_name_(std::move(dataset_name)), correct_prob_(correct_prob), seed_(seed) {}

CompletionResult DatasetNameMock::complete(const CompletionRequest& request) {
  CompletionResult result;
  const std::string key =
      request.sentences.empty() ? request.prompt : request.sentences[0].id;
  Rng rng(derive_seed(seed_, key, static_cast<std::uint64_t>(request.round)));
  result.text = rng.bernoulli(correct_prob_) ? dataset_name_ : "unknown-dataset";
  result.usage.input_tokens = static_cast<std::int64_t>(request.prompt.size() / 4);
  result.usage.output_tokens = static_cast<std::int64_t>(result.text.size() / 4);
  return result;
}

}  // namespace alner
