#include "alner/loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/quality.hpp"
#include "alner/remote_annotator.hpp"
#include "alner/rng.hpp"
#include "alner/sampling.hpp"

namespace alner {

namespace {

using nlohmann::json;

struct LabeledEntry {
  std::string id;
  std::vector<std::string> labels;
};

struct LoopState {
  std::vector<LabeledEntry> labeled;   // insertion order = training order
  std::vector<std::string> pool_ids;   // original corpus order
  std::vector<IterationRecord> records;
  std::optional<double> baseline;
  int next_iteration = 1;
};

json usage_to_json(const TokenUsage& u) {
  return json{{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
}

TokenUsage usage_from_json(const json& j) {
  TokenUsage u;
  u.input_tokens = j.value("input_tokens", std::int64_t{0});
  u.output_tokens = j.value("output_tokens", std::int64_t{0});
  return u;
}

json record_to_json(const IterationRecord& r) {
  json j;
  j["iteration"] = r.iteration;
  j["labeled_size"] = r.labeled_size;
  j["selected_ids"] = r.selected_ids;
  j["ok"] = r.ok_count;
  j["empty"] = r.empty_count;
  j["omission"] = r.omission_count;
  if (r.test_entity_accuracy) {
    j["test_entity_accuracy"] = *r.test_entity_accuracy;
  } else {
    j["test_entity_accuracy"] = nullptr;
  }
  j["mean_selected_entropy"] = r.mean_selected_entropy;
  j["usage"] = usage_to_json(r.usage);
  return j;
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.labeled_size = j.at("labeled_size").get<std::size_t>();
  r.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
  r.ok_count = j.at("ok").get<std::size_t>();
  r.empty_count = j.at("empty").get<std::size_t>();
  r.omission_count = j.at("omission").get<std::size_t>();
  if (!j.at("test_entity_accuracy").is_null()) {
    r.test_entity_accuracy = j.at("test_entity_accuracy").get<double>();
  }
  r.mean_selected_entropy = j.at("mean_selected_entropy").get<double>();
  r.usage = usage_from_json(j.at("usage"));
  return r;
}

const char* annotator_kind_name(AnnotatorKind k) {
  switch (k) {
    case AnnotatorKind::Oracle: return "oracle";
    case AnnotatorKind::Mock: return "mock";
    case AnnotatorKind::Remote: return "remote";
  }
  return "unknown";
}

// Paths (checkpoint dir, transcript file) are environment, not experiment
// identity, and stay out of the snapshot so reruns in fresh directories
// compare byte-identical.
json config_to_json(const LoopConfig& cfg) {
  json j;
  j["seed_fraction"] = cfg.seed_fraction;
  j["select_fraction"] = cfg.select_fraction;
  j["max_iterations"] = cfg.max_iterations;
  j["annotator"] = annotator_kind_name(cfg.annotator);
  j["mock"] = {{"accuracy", cfg.mock.accuracy},
               {"empty_rate", cfg.mock.empty_rate},
               {"omission_rate", cfg.mock.omission_rate},
               {"seed", cfg.mock.seed}};
  j["annotation"] = {
      {"model_name", cfg.annotation.model_name},
      {"temperature", cfg.annotation.temperature},
      {"max_retries", cfg.annotation.max_retries},
      {"batch_size", cfg.annotation.batch_size},
      {"max_in_flight", cfg.annotation.max_in_flight},
      {"strict_token_match", cfg.annotation.strict_token_match},
      {"variant",
       cfg.annotation.variant == PromptVariant::Default ? "default" : "shortened"}};
  j["baseline"] = cfg.baseline;
  j["seed"] = cfg.seed;
  j["examples_seed"] = cfg.examples_seed;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"lr_decay", cfg.train.lr_decay},
                {"l2", cfg.train.l2},
                {"batch_size", cfg.train.batch_size},
                {"seed", cfg.train.seed},
                {"shuffle", cfg.train.shuffle}};
  if (cfg.cost_model) {
    j["cost_model"] = {
        {"usd_per_1m_input", cfg.cost_model->usd_per_1m_input},
        {"usd_per_1m_output", cfg.cost_model->usd_per_1m_output},
        {"human_cost_per_200_sentences", cfg.cost_model->human_cost_per_200_sentences},
        {"n_human_annotators", cfg.cost_model->n_human_annotators}};
  } else {
    j["cost_model"] = nullptr;
  }
  return j;
}

class CorpusIndex {
 public:
  explicit CorpusIndex(const Corpus& corpus) : corpus_(corpus) {
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      by_id_[corpus.sentences[i].id] = i;
    }
  }

  const Sentence& at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error("loop: unknown sentence id '" + id + "'");
    return corpus_.sentences[it->second];
  }

 private:
  const Corpus& corpus_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

Corpus labeled_to_corpus(const std::vector<LabeledEntry>& labeled,
                         const CorpusIndex& index, const std::string& language) {
  Corpus out;
  out.language = language;
  for (const auto& entry : labeled) {
    const Sentence& src = index.at(entry.id);
    Sentence s;
    s.id = src.id;
    s.tokens = src.tokens;
    s.gold = entry.labels;
    s.language = src.language;
    out.sentences.push_back(std::move(s));
  }
  return out;
}

std::optional<double> evaluate_on_test(const TaggerModel& model, const Corpus& test) {
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
  for (const auto& s : test.sentences) {
    if (!s.gold) throw Error("loop: test sentence '" + s.id + "' has no gold labels");
    pairs.emplace_back(model.predict_labels(s), *s.gold);
  }
  return entity_accuracy_pooled(pairs);
}

TrainConfig train_config_for(const LoopConfig& cfg, std::uint64_t stage) {
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.train.seed, "train", stage);
  return tc;
}

std::string checkpoint_path(const LoopConfig& cfg) {
  return (std::filesystem::path(cfg.checkpoint_dir) / "checkpoint.json").string();
}

void write_checkpoint(const LoopConfig& cfg, const LoopState& state,
                      std::size_t original_size) {
  if (cfg.checkpoint_dir.empty()) return;
  std::filesystem::create_directories(cfg.checkpoint_dir);
  json doc;
  doc["format_version"] = 1;
  doc["config"] = config_to_json(cfg);
  doc["original_size"] = original_size;
  if (state.baseline) {
    doc["baseline_accuracy"] = *state.baseline;
  } else {
    doc["baseline_accuracy"] = nullptr;
  }
  json labeled = json::array();
  for (const auto& entry : state.labeled) {
    labeled.push_back({{"id", entry.id}, {"labels", entry.labels}});
  }
  doc["labeled"] = std::move(labeled);
  doc["pool"] = state.pool_ids;
  json records = json::array();
  for (const auto& r : state.records) records.push_back(record_to_json(r));
  doc["iterations"] = std::move(records);
  doc["next_iteration"] = state.next_iteration;

  const std::string path = checkpoint_path(cfg);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write checkpoint '" + tmp + "'");
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::optional<LoopState> load_checkpoint(const LoopConfig& cfg,
                                         std::size_t original_size) {
  if (cfg.checkpoint_dir.empty()) return std::nullopt;
  const std::string path = checkpoint_path(cfg);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || doc.value("format_version", 0) != 1) {
    throw Error("checkpoint '" + path + "': unsupported format");
  }
  if (doc.at("original_size").get<std::size_t>() != original_size) {
    throw Error("checkpoint '" + path + "': corpus size changed");
  }
  const json stored = doc.at("config");
  const json current = config_to_json(cfg);
  // max_iterations may grow between runs; everything else must match.
  for (const auto& [key, value] : current.items()) {
    if (key == "max_iterations") continue;
    if (stored.at(key) != value) {
      throw Error("checkpoint '" + path + "': config mismatch on '" + key + "'");
    }
  }

  LoopState state;
  for (const auto& entry : doc.at("labeled")) {
    state.labeled.push_back({entry.at("id").get<std::string>(),
                             entry.at("labels").get<std::vector<std::string>>()});
  }
  state.pool_ids = doc.at("pool").get<std::vector<std::string>>();
  for (const auto& r : doc.at("iterations")) {
    state.records.push_back(record_from_json(r));
  }
  if (!doc.at("baseline_accuracy").is_null()) {
    state.baseline = doc.at("baseline_accuracy").get<double>();
  }
  state.next_iteration = doc.at("next_iteration").get<int>();
  return state;
}

void check_partition(const LoopState& state, std::size_t original_size) {
  std::unordered_set<std::string> seen;
  for (const auto& e : state.labeled) {
    if (!seen.insert(e.id).second) throw Error("loop invariant: duplicate labeled id");
  }
  for (const auto& id : state.pool_ids) {
    if (!seen.insert(id).second) {
      throw Error("loop invariant: labeled and pool overlap on '" + id + "'");
    }
  }
  if (seen.size() != original_size) {
    throw Error("loop invariant: labeled + pool do not cover the corpus");
  }
}

}  // namespace

double run_baseline(const Corpus& train_set, const Corpus& test,
                    const TrainConfig& cfg) {
  if (train_set.sentences.empty()) throw Error("run_baseline: empty training set");
  if (test.sentences.empty()) throw Error("run_baseline: empty test set");
  const TaggerModel model = train(train_set, cfg);
  const auto acc = evaluate_on_test(model, test);
  if (!acc) throw Error("run_baseline: test set has no entity tokens");
  return *acc;
}

std::optional<double> annotation_cost_ratio(double human_cost_per_annotator,
                                            int n_annotators, double llm_cost) {
  if (llm_cost <= 0.0) return std::nullopt;
  return human_cost_per_annotator * static_cast<double>(n_annotators) / llm_cost;
}

CostComparison estimate_cost(const RunReport& report, const CostModel& model) {
  CostComparison c;
  for (const auto& r : report.iterations) {
    c.annotated_sentences += r.selected_ids.size();
    c.usage += r.usage;
  }
  c.llm_total_usd =
      static_cast<double>(c.usage.input_tokens) / 1e6 * model.usd_per_1m_input +
      static_cast<double>(c.usage.output_tokens) / 1e6 * model.usd_per_1m_output;
  const double batches =
      std::ceil(static_cast<double>(c.annotated_sentences) / 200.0);
  const double human_per_annotator = batches * model.human_cost_per_200_sentences;
  c.human_total_usd =
      human_per_annotator * static_cast<double>(model.n_human_annotators);
  c.ratio = annotation_cost_ratio(human_per_annotator, model.n_human_annotators,
                                  c.llm_total_usd);
  return c;
}

RunReport run_active_learning(const Corpus& train_set, const Corpus& test,
                              const LoopConfig& cfg) {
  if (train_set.sentences.empty()) throw Error("run_active_learning: empty training set");
  if (test.sentences.empty()) throw Error("run_active_learning: empty test set");
  if (!(cfg.seed_fraction > 0.0 && cfg.seed_fraction <= 1.0)) {
    throw Error("run_active_learning: seed_fraction must be in (0, 1]");
  }
  if (cfg.max_iterations < 0) throw Error("run_active_learning: negative max_iterations");

  const std::size_t original_size = train_set.sentences.size();
  const CorpusIndex index(train_set);
  const FewShotExamples examples = pick_examples(test, cfg.examples_seed);

  std::unique_ptr<AnnotatorBackend> backend;
  switch (cfg.annotator) {
    case AnnotatorKind::Oracle:
      backend = std::make_unique<MockAnnotator>(MockProfile{}, train_set);
      break;
    case AnnotatorKind::Mock:
      backend = std::make_unique<MockAnnotator>(cfg.mock, train_set);
      break;
    case AnnotatorKind::Remote:
      backend = std::make_unique<RemoteAnnotator>(cfg.annotation);
      break;
  }

  LoopState state;
  // Scoring model for the next iteration; lazily retrained after a resume.
  std::optional<TaggerModel> model;
  if (auto loaded = load_checkpoint(cfg, original_size)) {
    state = std::move(*loaded);
  } else {
    // Seed split: uniform random seed_fraction of the corpus, kept in
    // original corpus order for stable training data.
    std::vector<std::size_t> positions(original_size);
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    Rng rng(derive_seed(cfg.seed, "seed-split"));
    rng.shuffle(positions);
    const std::size_t k = std::min<std::size_t>(
        original_size, static_cast<std::size_t>(std::ceil(
                           cfg.seed_fraction * static_cast<double>(original_size))));
    std::vector<std::size_t> seed_positions(positions.begin(), positions.begin() + k);
    std::sort(seed_positions.begin(), seed_positions.end());
    std::unordered_set<std::size_t> in_seed(seed_positions.begin(), seed_positions.end());
    for (std::size_t p : seed_positions) {
      const Sentence& s = train_set.sentences[p];
      if (!s.gold) throw Error("run_active_learning: seed sentence '" + s.id +
                               "' has no gold labels");
      state.labeled.push_back({s.id, *s.gold});
    }
    for (std::size_t i = 0; i < original_size; ++i) {
      if (!in_seed.count(i)) state.pool_ids.push_back(train_set.sentences[i].id);
    }

    if (cfg.baseline) {
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.train.seed, "baseline");
      state.baseline = run_baseline(train_set, test, tc);
    }

    // Iteration 0: model trained on the seed subset alone.
    model = train(labeled_to_corpus(state.labeled, index, train_set.language),
                  train_config_for(cfg, 0));
    IterationRecord r0;
    r0.iteration = 0;
    r0.labeled_size = state.labeled.size();
    r0.test_entity_accuracy = evaluate_on_test(*model, test);
    state.records.push_back(std::move(r0));
    state.next_iteration = 1;
    check_partition(state, original_size);
    write_checkpoint(cfg, state, original_size);
  }

  // The scoring model for iteration i is the model retrained after i-1.
  auto current_model = [&]() -> const TaggerModel& {
    if (!model) {
      model = train(labeled_to_corpus(state.labeled, index, train_set.language),
                    train_config_for(
                        cfg, static_cast<std::uint64_t>(state.next_iteration - 1)));
    }
    return *model;
  };

  for (int iteration = state.next_iteration; iteration <= cfg.max_iterations;
       ++iteration) {
    if (state.pool_ids.empty()) break;

    // Score the pool by mean token entropy under the current model.
    std::vector<SampleEntropy> scored;
    scored.reserve(state.pool_ids.size());
    for (const auto& id : state.pool_ids) {
      const Sentence& s = index.at(id);
      scored.push_back({id, sample_entropy(current_model().predict_proba(s))});
    }
    std::vector<std::string> selected =
        select_most_uncertain(scored, cfg.select_fraction, original_size);
    if (selected.empty()) break;

    IterationRecord record;
    record.iteration = iteration;
    record.selected_ids = selected;
    {
      std::unordered_map<std::string, double> by_id;
      for (const auto& se : scored) by_id[se.sentence_id] = se.value;
      double sum = 0.0;
      for (const auto& id : selected) sum += by_id[id];
      record.mean_selected_entropy = sum / static_cast<double>(selected.size());
    }

    std::vector<Sentence> to_annotate;
    to_annotate.reserve(selected.size());
    for (const auto& id : selected) to_annotate.push_back(index.at(id));

    const auto attempts =
        annotate(to_annotate, cfg.annotation, examples, *backend, iteration);

    // Annotator unreachable across the whole iteration: abort instead of
    // recording a no-progress iteration. The previous checkpoint stays on
    // disk, so rerunning resumes exactly here.
    const bool all_transport_failed =
        !attempts.empty() &&
        std::all_of(attempts.begin(), attempts.end(),
                    [](const AnnotationAttempt& a) { return a.transport_failed; });
    if (all_transport_failed) {
      throw Error("run_active_learning: annotator unreachable in iteration " +
                  std::to_string(iteration) +
                  "; rerun with the same config to resume from the checkpoint");
    }

    std::unordered_set<std::string> accepted;
    for (const auto& attempt : attempts) {
      record.usage += attempt.usage;
      switch (attempt.outcome.kind) {
        case OutcomeKind::Ok:
          state.labeled.push_back({attempt.sentence_id, attempt.outcome.labels});
          accepted.insert(attempt.sentence_id);
          ++record.ok_count;
          break;
        case OutcomeKind::Empty:
          ++record.empty_count;
          break;
        case OutcomeKind::Omission:
          ++record.omission_count;
          break;
      }
    }
    // Rejected sentences stay in the pool for later iterations.
    std::erase_if(state.pool_ids,
                  [&](const std::string& id) { return accepted.count(id) > 0; });
    check_partition(state, original_size);

    model = train(labeled_to_corpus(state.labeled, index, train_set.language),
                  train_config_for(cfg, static_cast<std::uint64_t>(iteration)));
    record.labeled_size = state.labeled.size();
    record.test_entity_accuracy = evaluate_on_test(*model, test);

    state.records.push_back(std::move(record));
    state.next_iteration = iteration + 1;
    write_checkpoint(cfg, state, original_size);
  }

  RunReport report;
  report.config = cfg;
  report.original_size = original_size;
  report.baseline_accuracy = state.baseline;
  report.iterations = std::move(state.records);
  if (cfg.cost_model) report.cost = estimate_cost(report, *cfg.cost_model);
  return report;
}

std::string report_to_json(const RunReport& report) {
  json doc;
  doc["config"] = config_to_json(report.config);
  doc["original_size"] = report.original_size;
  if (report.baseline_accuracy) {
    doc["baseline_accuracy"] = *report.baseline_accuracy;
  } else {
    doc["baseline_accuracy"] = nullptr;
  }
  json records = json::array();
  for (const auto& r : report.iterations) records.push_back(record_to_json(r));
  doc["iterations"] = std::move(records);
  if (report.cost) {
    json c;
    c["human_total_usd"] = report.cost->human_total_usd;
    c["llm_total_usd"] = report.cost->llm_total_usd;
    if (report.cost->ratio) {
      c["ratio"] = *report.cost->ratio;
    } else {
      c["ratio"] = nullptr;
    }
    c["annotated_sentences"] = report.cost->annotated_sentences;
    c["usage"] = usage_to_json(report.cost->usage);
    doc["cost_comparison"] = std::move(c);
  } else {
    doc["cost_comparison"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

std::string iterations_to_csv(const RunReport& report) {
  std::string out = "iteration,labeled_size,data_pct,entity_accuracy\n";
  char line[160];
  for (const auto& r : report.iterations) {
    const double pct = 100.0 * static_cast<double>(r.labeled_size) /
                       static_cast<double>(report.original_size);
    if (r.test_entity_accuracy) {
      std::snprintf(line, sizeof(line), "%d,%zu,%.4f,%.6f\n", r.iteration,
                    r.labeled_size, pct, *r.test_entity_accuracy);
    } else {
      std::snprintf(line, sizeof(line), "%d,%zu,%.4f,NA\n", r.iteration,
                    r.labeled_size, pct);
    }
    out += line;
  }
  return out;
}

void write_report_json(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report '" + path + "'");
  out << report_to_json(report);
}

void write_iterations_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write CSV '" + path + "'");
  out << iterations_to_csv(report);
}

}  // namespace alner
