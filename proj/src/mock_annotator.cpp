#include "alner/mock_annotator.hpp"

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/labels.hpp"
#include "alner/rng.hpp"

namespace alner {

namespace {

using nlohmann::json;

struct SimulatedResponse {
  bool empty = false;
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

SimulatedResponse simulate(const Sentence& gold, const MockProfile& profile,
                           int round) {
  Rng rng(derive_seed(profile.seed, gold.id, static_cast<std::uint64_t>(round)));
  SimulatedResponse out;

  const bool empty = rng.bernoulli(profile.empty_rate);
  const bool omission = rng.bernoulli(profile.omission_rate);

  out.tokens = gold.tokens;
  out.labels = *gold.gold;
  for (auto& label : out.labels) {
    if (rng.bernoulli(1.0 - profile.accuracy)) {
      const std::size_t current = *label_index(label);
      std::size_t other = rng.index(kNumLabels - 1);
      if (other >= current) ++other;
      label = std::string(kLabels[other]);
    }
  }

  if (empty) {
    out.empty = true;
    return out;
  }
  if (omission && !out.labels.empty()) {
    const std::size_t i = rng.index(out.labels.size());
    if (rng.bernoulli(0.5)) {
      out.tokens.erase(out.tokens.begin() + static_cast<std::ptrdiff_t>(i));
      out.labels.erase(out.labels.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      out.tokens.insert(out.tokens.begin() + static_cast<std::ptrdiff_t>(i), out.tokens[i]);
      out.labels.insert(out.labels.begin() + static_cast<std::ptrdiff_t>(i), out.labels[i]);
    }
  }
  return out;
}

}  // namespace

MockAnnotator::MockAnnotator(MockProfile profile, const Corpus& gold_source)
    : profile_(profile), gold_(gold_source) {
  for (std::size_t i = 0; i < gold_.sentences.size(); ++i) {
    const Sentence& s = gold_.sentences[i];
    if (!s.gold) {
      throw Error("MockAnnotator: sentence '" + s.id + "' has no gold labels");
    }
    by_id_[s.id] = i;
  }
}

MockAnnotator MockAnnotator::oracle(const Corpus& gold_source) {
  return MockAnnotator(MockProfile{}, gold_source);
}

CompletionResult MockAnnotator::complete(const CompletionRequest& request) {
  std::vector<SimulatedResponse> responses;
  responses.reserve(request.sentences.size());
  for (const auto& s : request.sentences) {
    auto it = by_id_.find(s.id);
    if (it == by_id_.end()) {
      throw Error("MockAnnotator: unknown sentence id '" + s.id + "'");
    }
    responses.push_back(simulate(gold_.sentences[it->second], profile_, request.round));
  }

  CompletionResult result;
  if (request.sentences.size() == 1) {
    if (!responses[0].empty) {
      result.text = serialize_wire_output(responses[0].tokens, responses[0].labels);
    }
  } else {
    json lists = json::array();
    for (const auto& r : responses) {
      if (r.empty) {
        lists.push_back(nullptr);
        continue;
      }
      json pairs = json::array();
      for (std::size_t i = 0; i < r.labels.size(); ++i) {
        pairs.push_back(json::array({r.tokens[i], r.labels[i]}));
      }
      lists.push_back(std::move(pairs));
    }
    json rec;
    rec["output"] = lists;
    result.text = rec.dump();
  }

  result.usage.input_tokens = static_cast<std::int64_t>(request.prompt.size() / 4);
  result.usage.output_tokens = static_cast<std::int64_t>(result.text.size() / 4);
  return result;
}

}  // namespace alner
