// Command-line front end: synthetic corpus generation, corpus conversion,
// entity-balanced subsampling, annotator evaluation, the active-learning
// loop, and contamination probes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "alner/contamination.hpp"
#include "alner/corpus_io.hpp"
#include "alner/error.hpp"
#include "alner/loop.hpp"
#include "alner/mock_annotator.hpp"
#include "alner/quality.hpp"
#include "alner/remote_annotator.hpp"
#include "alner/sampling.hpp"
#include "alner/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace alner;

namespace {

bool has_extension(const std::string& path, const char* ext) {
  return fs::path(path).extension() == ext;
}

Corpus load_corpus_any(const std::string& path) {
  if (has_extension(path, ".conll") || has_extension(path, ".txt")) {
    return load_conll(path);
  }
  return load_jsonl(path);
}

void save_corpus_any(const Corpus& c, const std::string& path) {
  if (has_extension(path, ".conll") || has_extension(path, ".txt")) {
    save_conll(c, path);
  } else {
    save_jsonl(c, path);
  }
}

struct AnnotatorSpec {
  AnnotatorKind kind = AnnotatorKind::Oracle;
  MockProfile mock;
  double name_prob = 1.0;  // contamination mock correct-answer probability
  std::uint64_t seed = 0;
};

AnnotatorSpec parse_annotator_spec(const std::string& spec) {
  AnnotatorSpec out;
  std::string head = spec;
  std::string params;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    head = spec.substr(0, colon);
    params = spec.substr(colon + 1);
  }
  if (head == "oracle") {
    out.kind = AnnotatorKind::Oracle;
  } else if (head == "mock") {
    out.kind = AnnotatorKind::Mock;
  } else if (head == "remote") {
    out.kind = AnnotatorKind::Remote;
  } else {
    throw Error("unknown annotator '" + head + "' (expected oracle|mock|remote)");
  }
  std::stringstream ss(params);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("bad annotator parameter '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "acc" || key == "accuracy") {
      out.mock.accuracy = std::stod(value);
    } else if (key == "empty") {
      out.mock.empty_rate = std::stod(value);
    } else if (key == "omission") {
      out.mock.omission_rate = std::stod(value);
    } else if (key == "seed") {
      out.mock.seed = std::stoull(value);
      out.seed = out.mock.seed;
    } else if (key == "p") {
      out.name_prob = std::stod(value);
    } else {
      throw Error("unknown annotator parameter '" + key + "'");
    }
  }
  return out;
}

// Flat key = value config format; '#' starts a comment.
std::map<std::string, std::string> parse_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out[key] = value;
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("expected a boolean, got '" + v + "'");
}

void apply_config_file(LoopConfig& cfg, const std::string& path,
                       std::string& annotator_spec) {
  CostModel cost = cfg.cost_model.value_or(CostModel{});
  bool saw_cost = cfg.cost_model.has_value();
  for (const auto& [key, value] : parse_flat_config(path)) {
    if (key == "seed_fraction") cfg.seed_fraction = std::stod(value);
    else if (key == "select_fraction") cfg.select_fraction = std::stod(value);
    else if (key == "max_iterations") cfg.max_iterations = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "examples_seed") cfg.examples_seed = std::stoull(value);
    else if (key == "baseline") cfg.baseline = parse_bool(value);
    else if (key == "annotator") annotator_spec = value;
    else if (key == "batch_size") cfg.annotation.batch_size = std::stoi(value);
    else if (key == "max_in_flight") cfg.annotation.max_in_flight = std::stoi(value);
    else if (key == "variant") {
      if (value == "default") cfg.annotation.variant = PromptVariant::Default;
      else if (value == "shortened") cfg.annotation.variant = PromptVariant::Shortened;
      else throw Error("unknown prompt variant '" + value + "'");
    } else if (key == "endpoint_url") cfg.annotation.endpoint_url = value;
    else if (key == "model_name") cfg.annotation.model_name = value;
    else if (key == "api_key_env") cfg.annotation.api_key_env_name = value;
    else if (key == "temperature") cfg.annotation.temperature = std::stod(value);
    else if (key == "max_retries") cfg.annotation.max_retries = std::stoi(value);
    else if (key == "request_timeout_s") cfg.annotation.request_timeout_s = std::stod(value);
    else if (key == "epochs") cfg.train.epochs = std::stoi(value);
    else if (key == "learning_rate") cfg.train.learning_rate = std::stod(value);
    else if (key == "lr_decay") cfg.train.lr_decay = std::stod(value);
    else if (key == "l2") cfg.train.l2 = std::stod(value);
    else if (key == "train_batch_size") cfg.train.batch_size = std::stoi(value);
    else if (key == "train_seed") cfg.train.seed = std::stoull(value);
    else if (key == "shuffle") cfg.train.shuffle = parse_bool(value);
    else if (key == "cost.input_per_1m") { cost.usd_per_1m_input = std::stod(value); saw_cost = true; }
    else if (key == "cost.output_per_1m") { cost.usd_per_1m_output = std::stod(value); saw_cost = true; }
    else if (key == "cost.human_per_200") { cost.human_cost_per_200_sentences = std::stod(value); saw_cost = true; }
    else if (key == "cost.annotators") { cost.n_human_annotators = std::stoi(value); saw_cost = true; }
    else throw Error("unknown config key '" + key + "'");
  }
  if (saw_cost) cfg.cost_model = cost;
}

json shares_to_json(const std::map<std::string, double>& shares) {
  json out = json::object();
  for (const auto& [cls, v] : shares) out[cls] = v;
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

int cmd_gen(const std::string& out_path, const std::string& test_out,
            std::size_t test_n, SynthConfig cfg) {
  if (!test_out.empty()) cfg.n_sentences += test_n;
  const Corpus c = generate_corpus(cfg);
  if (test_out.empty()) {
    save_jsonl(c, out_path);
    std::cout << "wrote " << c.size() << " sentences to " << out_path << "\n";
    return 0;
  }
  // train/test halves must share one vocabulary universe, hence one corpus
  const auto [train_part, test_part] = split_corpus(c, c.size() - test_n);
  save_jsonl(train_part, out_path);
  save_jsonl(test_part, test_out);
  std::cout << "wrote " << train_part.size() << " sentences to " << out_path
            << " and " << test_part.size() << " to " << test_out << "\n";
  return 0;
}

int cmd_convert(const std::string& in_path, const std::string& out_path, bool lint) {
  const Corpus c = load_corpus_any(in_path);
  save_corpus_any(c, out_path);
  std::cout << "converted " << c.size() << " sentences\n";
  if (lint) {
    for (const auto& v : lint_bio(c)) {
      std::cout << v.sentence_id << ":" << v.position << " " << v.message << "\n";
    }
  }
  return 0;
}

int cmd_lint(const std::string& in_path) {
  const Corpus c = load_corpus_any(in_path);
  const auto violations = lint_bio(c);
  for (const auto& v : violations) {
    std::cout << v.sentence_id << ":" << v.position << " " << v.message << "\n";
  }
  std::cout << violations.size() << " BIO violation(s) in " << c.size()
            << " sentence(s)\n";
  return 0;
}

int cmd_sample(const std::string& in_path, const std::string& out_path,
               const BalancedSamplerConfig& cfg, std::string report_path) {
  const Corpus c = load_corpus_any(in_path);
  const auto result = balanced_sample(c, cfg);
  save_jsonl(result.sample, out_path);

  if (report_path.empty()) report_path = out_path + ".report.json";
  json report;
  report["requested"] = cfg.sample_size;
  report["returned"] = result.sample.size();
  report["filtered_pool_size"] = result.filtered_size;
  report["truncated"] = result.truncated;
  report["min_proportion"] = cfg.min_proportion;
  report["max_proportion"] = cfg.max_proportion;
  report["seed"] = cfg.seed;
  report["pool_class_shares"] = shares_to_json(result.pool_class_shares);
  report["sample_class_shares"] = shares_to_json(result.sample_class_shares);
  report["class_share_tv_distance"] =
      total_variation(result.pool_class_shares, result.sample_class_shares);
  write_text(report_path, report.dump(2) + "\n");

  std::cout << "sampled " << result.sample.size() << " of " << result.filtered_size
            << " filtered sentences";
  if (result.truncated) std::cout << " (filtered pool smaller than requested)";
  std::cout << "\nreport: " << report_path << "\n";
  return 0;
}

std::unique_ptr<AnnotatorBackend> make_backend(const AnnotatorSpec& spec,
                                               const AnnotatorConfig& cfg,
                                               const Corpus& gold_source) {
  switch (spec.kind) {
    case AnnotatorKind::Oracle:
      return std::make_unique<MockAnnotator>(MockProfile{}, gold_source);
    case AnnotatorKind::Mock:
      return std::make_unique<MockAnnotator>(spec.mock, gold_source);
    case AnnotatorKind::Remote:
      return std::make_unique<RemoteAnnotator>(cfg);
  }
  throw Error("unreachable annotator kind");
}

int cmd_evaluate(const std::string& in_path, const std::string& examples_path,
                 const std::string& spec_text, int rounds,
                 const std::string& out_path, AnnotatorConfig acfg,
                 std::uint64_t examples_seed) {
  const Corpus subset = load_corpus_any(in_path);
  const Corpus example_split =
      examples_path.empty() ? subset : load_corpus_any(examples_path);
  const FewShotExamples examples = pick_examples(example_split, examples_seed);

  const AnnotatorSpec spec = parse_annotator_spec(spec_text);
  auto backend = make_backend(spec, acfg, subset);

  const auto sets = reannotate(subset, acfg, examples, *backend, rounds);
  const auto tally = format_error_tally(sets);
  const auto scores = consistency(sets);

  json report;
  report["n_sentences"] = subset.size();
  report["rounds"] = rounds;
  try {
    const auto kappa = fleiss_kappa(sets);
    report["fleiss_kappa"] = kappa.kappa;
    report["kappa_items"] = kappa.n_items;
    report["kappa_raters"] = kappa.n_raters;
    report["kappa_excluded"] = kappa.excluded_samples;
  } catch (const Error& e) {
    report["fleiss_kappa"] = nullptr;
    report["kappa_error"] = e.what();
  }
  report["consistency_overall"] = scores.overall;
  json per_sample = json::object();
  for (const auto& [id, v] : scores.per_sample) per_sample[id] = v;
  report["consistency_per_sample"] = std::move(per_sample);
  report["empty_sentences"] = tally.empty_sentences;
  report["omission_sentences"] = tally.omission_sentences;
  report["omission_not_computable"] = tally.omission_not_computable;
  write_text(out_path, report.dump(2) + "\n");

  std::cout << "sentences:            " << subset.size() << "\n"
            << "reannotation rounds:  " << rounds << "\n";
  if (report["fleiss_kappa"].is_null()) {
    std::cout << "fleiss kappa:         n/a (" << report["kappa_error"] << ")\n";
  } else {
    std::cout << "fleiss kappa:         " << report["fleiss_kappa"] << "\n";
  }
  std::cout << "consistency overall:  " << scores.overall << "\n"
            << "empty sentences:      " << tally.empty_sentences << "\n"
            << "omission sentences:   "
            << (tally.omission_not_computable ? std::string("-")
                                              : std::to_string(tally.omission_sentences))
            << "\n"
            << "report: " << out_path << "\n";
  return 0;
}

int cmd_run_al(const std::string& corpus_path, const std::string& test_path,
               const std::string& out_dir, LoopConfig cfg,
               const std::string& spec_text, bool transcripts) {
  const Corpus train_set = load_corpus_any(corpus_path);
  const Corpus test_set = load_corpus_any(test_path);

  const AnnotatorSpec spec = parse_annotator_spec(spec_text);
  cfg.annotator = spec.kind;
  if (spec.kind == AnnotatorKind::Mock) cfg.mock = spec.mock;

  fs::create_directories(out_dir);
  cfg.checkpoint_dir = (fs::path(out_dir) / "checkpoints").string();
  if (transcripts) {
    cfg.annotation.transcript_path = (fs::path(out_dir) / "transcripts.jsonl").string();
  }

  const RunReport report = run_active_learning(train_set, test_set, cfg);

  const auto report_path = (fs::path(out_dir) / "report.json").string();
  const auto csv_path = (fs::path(out_dir) / "iterations.csv").string();
  write_report_json(report, report_path);
  write_iterations_csv(report, csv_path);

  if (report.baseline_accuracy) {
    std::cout << "baseline entity accuracy: " << *report.baseline_accuracy << "\n";
  }
  for (const auto& r : report.iterations) {
    std::cout << "iteration " << r.iteration << ": labeled " << r.labeled_size;
    if (r.test_entity_accuracy) {
      std::cout << ", entity accuracy " << *r.test_entity_accuracy;
    }
    if (r.iteration > 0) {
      std::cout << " (ok " << r.ok_count << ", empty " << r.empty_count
                << ", omission " << r.omission_count << ")";
    }
    std::cout << "\n";
  }
  if (report.cost && report.cost->ratio) {
    std::cout << "human/LLM cost ratio: " << *report.cost->ratio << "\n";
  }
  std::cout << "report: " << report_path << "\ncurve:  " << csv_path << "\n";
  return 0;
}

int cmd_contamination(const std::string& samples_path, const std::string& dataset,
                      const std::string& aliases_csv, const std::string& spec_text,
                      ContaminationConfig cfg, const std::string& out_path,
                      bool run_icl, AnnotatorConfig acfg) {
  cfg.dataset_name = dataset;
  std::stringstream ss(aliases_csv);
  std::string alias;
  while (std::getline(ss, alias, ',')) {
    if (!alias.empty()) cfg.dataset_aliases.push_back(alias);
  }

  const Corpus pool = load_corpus_any(samples_path);
  const auto samples = stratify_samples(pool.sentences, cfg);

  const AnnotatorSpec spec = parse_annotator_spec(spec_text);
  std::unique_ptr<AnnotatorBackend> backend;
  if (spec.kind == AnnotatorKind::Remote) {
    acfg.temperature = cfg.temperature;
    backend = std::make_unique<RemoteAnnotator>(acfg);
  } else {
    backend = std::make_unique<DatasetNameMock>(dataset, spec.name_prob, spec.seed);
  }

  const auto report = contamination_score(samples, *backend, cfg);

  json doc;
  doc["dataset"] = dataset;
  doc["n_records"] = report.n_records;
  doc["n_runs"] = cfg.n_runs;
  doc["multilingual"] = cfg.multilingual;
  doc["per_run_correct"] = report.per_run_correct;
  doc["per_run_score"] = report.per_run_score;
  doc["mean"] = report.mean;
  doc["stddev"] = report.stddev;
  // the near-exact rule is a fixed token-overlap threshold, not a judged match
  doc["near_exact_rule"] = "token_overlap>=0.8";

  if (run_icl) {
    std::size_t exact = 0, near = 0, none = 0, skipped = 0;
    for (const auto& s : samples) {
      if (s.tokens.size() < 2) {
        ++skipped;
        continue;
      }
      const auto probe = build_icl_probe(s, dataset);
      CompletionRequest req;
      req.prompt = probe.prompt;
      req.temperature = cfg.temperature;
      req.sentences = {s};
      const auto res = backend->complete(req);
      if (!res.transport_ok) {
        ++none;
        continue;
      }
      switch (classify_completion(res.text, probe.suffix_tokens)) {
        case CompletionMatch::Exact: ++exact; break;
        case CompletionMatch::NearExact: ++near; break;
        case CompletionMatch::NoMatch: ++none; break;
      }
    }
    doc["icl"] = {{"exact", exact},
                  {"near_exact", near},
                  {"no_match", none},
                  {"skipped_too_short", skipped}};
  }
  write_text(out_path, doc.dump(2) + "\n");

  std::cout << "contamination score: " << report.mean << " +/- " << report.stddev
            << " over " << cfg.n_runs << " runs x " << report.n_records
            << " records\nreport: " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-learning NER annotation toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic BIO corpus");
  std::string gen_out, gen_test_out;
  std::size_t gen_test_n = 500;
  SynthConfig synth;
  gen->add_option("--out", gen_out, "Output JSONL path")->required();
  gen->add_option("--n", synth.n_sentences, "Number of sentences");
  gen->add_option("--seed", synth.seed, "RNG seed");
  gen->add_option("--min-tokens", synth.min_tokens, "Minimum sentence length");
  gen->add_option("--max-tokens", synth.max_tokens, "Maximum sentence length");
  gen->add_option("--language", synth.language, "Language code");
  gen->add_option("--id-prefix", synth.id_prefix, "Sentence id prefix");
  gen->add_option("--test-out", gen_test_out,
                  "Also write a held-out split sharing the same vocabulary");
  gen->add_option("--test-n", gen_test_n, "Held-out split size");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert between CoNLL and JSONL");
  std::string conv_in, conv_out;
  bool conv_lint = false;
  convert->add_option("--in", conv_in, "Input corpus (.conll/.txt or .jsonl)")->required();
  convert->add_option("--out", conv_out, "Output corpus")->required();
  convert->add_flag("--lint", conv_lint, "Also report gold BIO violations");

  // lint
  auto* lint = app.add_subcommand("lint", "Report gold BIO violations");
  std::string lint_in;
  lint->add_option("--in", lint_in, "Input corpus")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "Entity-balanced subsample");
  std::string sample_in, sample_out, sample_report;
  BalancedSamplerConfig sample_cfg;
  sample->add_option("--in", sample_in, "Input corpus")->required();
  sample->add_option("--out", sample_out, "Output JSONL")->required();
  sample->add_option("--n", sample_cfg.sample_size, "Sample size");
  sample->add_option("--min-p", sample_cfg.min_proportion, "Minimum entity proportion");
  sample->add_option("--max-p", sample_cfg.max_proportion, "Maximum entity proportion");
  sample->add_option("--seed", sample_cfg.seed, "RNG seed");
  sample->add_option("--report", sample_report, "Sidecar report path");

  // shared annotator options
  AnnotatorConfig acfg;
  std::string annotator_spec = "oracle";
  auto add_remote_options = [&](CLI::App* cmd) {
    cmd->add_option("--endpoint", acfg.endpoint_url, "Chat-completion endpoint URL");
    cmd->add_option("--model", acfg.model_name, "Model name");
    cmd->add_option("--api-key-env", acfg.api_key_env_name,
                    "Environment variable holding the bearer token");
    cmd->add_option("--temperature", acfg.temperature, "Sampling temperature");
    cmd->add_option("--max-retries", acfg.max_retries, "Transport/5xx retries");
    cmd->add_option("--timeout", acfg.request_timeout_s, "Request timeout (s)");
    cmd->add_option("--max-in-flight", acfg.max_in_flight, "Concurrent requests");
    cmd->add_option("--batch", acfg.batch_size, "Sentences per prompt (1 or 2)");
    cmd->add_option("--transcripts", acfg.transcript_path, "JSONL transcript path");
  };

  // evaluate-annotator
  auto* evaluate = app.add_subcommand(
      "evaluate-annotator", "Reannotate a subset and report kappa/consistency");
  std::string eval_in, eval_examples, eval_out = "annotator_report.json";
  std::string eval_variant = "default";
  int eval_rounds = 10;
  std::uint64_t eval_examples_seed = 0;
  evaluate->add_option("--in", eval_in, "Corpus subset to reannotate")->required();
  evaluate->add_option("--examples-from", eval_examples,
                       "Held-out split for few-shot examples (default: --in)");
  evaluate->add_option("--annotator", annotator_spec,
                       "oracle | mock[:acc=..,empty=..,omission=..,seed=..] | remote");
  evaluate->add_option("--rounds", eval_rounds, "Reannotation attempts");
  evaluate->add_option("--out", eval_out, "JSON report path");
  evaluate->add_option("--variant", eval_variant, "Prompt variant: default|shortened");
  evaluate->add_option("--examples-seed", eval_examples_seed, "Example pick seed");
  add_remote_options(evaluate);

  // run-al
  auto* run = app.add_subcommand("run-al", "Run the active-learning loop");
  std::string run_corpus, run_test, run_out = "al_run", run_config;
  bool run_transcripts = false;
  LoopConfig loop_cfg;
  run->add_option("--corpus", run_corpus, "Training corpus")->required();
  run->add_option("--test", run_test, "Held-out test corpus")->required();
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--config", run_config, "Flat key = value config file");
  run->add_option("--annotator", annotator_spec,
                  "oracle | mock[:acc=..,empty=..,omission=..,seed=..] | remote");
  run->add_option("--seed", loop_cfg.seed, "Loop seed");
  run->add_option("--max-iterations", loop_cfg.max_iterations, "Iteration cap");
  run->add_option("--seed-fraction", loop_cfg.seed_fraction, "Initial labeled share");
  run->add_option("--select-fraction", loop_cfg.select_fraction,
                  "Share of the original corpus selected per iteration");
  run->add_flag("--baseline", loop_cfg.baseline, "Also train on 100% gold data");
  run->add_flag("--transcripts", run_transcripts, "Write annotation transcripts");

  // contamination
  auto* contam = app.add_subcommand("contamination", "Source-identification probe");
  std::string contam_samples, contam_dataset, contam_aliases, contam_out =
      "contamination_report.json";
  ContaminationConfig contam_cfg;
  bool contam_icl = false;
  contam->add_option("--samples", contam_samples, "Sample pool (JSONL)")->required();
  contam->add_option("--dataset", contam_dataset, "True source dataset name")->required();
  contam->add_option("--aliases", contam_aliases, "Comma-separated accepted answers");
  contam->add_option("--annotator", annotator_spec, "mock[:p=..,seed=..] | remote");
  contam->add_option("--runs", contam_cfg.n_runs, "Number of scoring runs");
  contam->add_option("--records", contam_cfg.n_records, "Records per run");
  contam->add_option("--seed", contam_cfg.seed, "Stratification seed");
  contam->add_flag("--multilingual", contam_cfg.multilingual,
                   "Stratify by language and say 'multilingual' in the prompt");
  contam->add_option("--per-language", contam_cfg.records_per_language,
                     "Records per language (multilingual)");
  contam->add_option("--languages", contam_cfg.languages_per_dataset,
                     "Languages per dataset (multilingual)");
  contam->add_option("--out", contam_out, "JSON report path");
  contam->add_flag("--icl", contam_icl, "Also run the partial-completion probe");
  add_remote_options(contam);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_out, gen_test_out, gen_test_n, synth);
    if (convert->parsed()) return cmd_convert(conv_in, conv_out, conv_lint);
    if (lint->parsed()) return cmd_lint(lint_in);
    if (sample->parsed()) return cmd_sample(sample_in, sample_out, sample_cfg, sample_report);
    if (evaluate->parsed()) {
      if (eval_variant == "shortened") acfg.variant = PromptVariant::Shortened;
      else if (eval_variant != "default") throw Error("unknown prompt variant '" + eval_variant + "'");
      return cmd_evaluate(eval_in, eval_examples, annotator_spec, eval_rounds,
                          eval_out, acfg, eval_examples_seed);
    }
    if (run->parsed()) {
      // explicit flags override the config file
      const LoopConfig from_flags = loop_cfg;
      const std::string flag_annotator = annotator_spec;
      if (!run_config.empty()) {
        apply_config_file(loop_cfg, run_config, annotator_spec);
        if (run->count("--seed")) loop_cfg.seed = from_flags.seed;
        if (run->count("--max-iterations")) loop_cfg.max_iterations = from_flags.max_iterations;
        if (run->count("--seed-fraction")) loop_cfg.seed_fraction = from_flags.seed_fraction;
        if (run->count("--select-fraction")) loop_cfg.select_fraction = from_flags.select_fraction;
        if (run->count("--baseline")) loop_cfg.baseline = from_flags.baseline;
        if (run->count("--annotator")) annotator_spec = flag_annotator;
      }
      return cmd_run_al(run_corpus, run_test, run_out, loop_cfg, annotator_spec,
                        run_transcripts);
    }
    if (contam->parsed()) {
      return cmd_contamination(contam_samples, contam_dataset, contam_aliases,
                               annotator_spec, contam_cfg, contam_out, contam_icl,
                               acfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
