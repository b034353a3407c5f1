#include "alner/prompt.hpp"

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/rng.hpp"

namespace alner {

namespace {

using nlohmann::json;

// Sentences the Shortened variant removes, verbatim.
const char* kFormatIntroSentence =
    "You will receive a list of tokens as the value for the 'input' key and "
    "text language as the value for the 'language' key in a JSON dictionary. ";
const char* kInputNote =
    "- The input tokens are provided in a list format and represent the text.\n";
const char* kTaskBegins = "Your task begins now!\n";

std::string label_block() {
  return
      "- \"O\": Represents words that are not part of any named entity.\n"
      "- \"B-PER\": Indicates the beginning of a person's name.\n"
      "- \"I-PER\": Used for tokens inside a person's name.\n"
      "- \"B-ORG\": Marks the beginning of an organization's name.\n"
      "- \"I-ORG\": Tokens inside an organization's name.\n"
      "- \"B-LOC\": Marks the beginning of a location (place) name.\n"
      "- \"I-LOC\": Tokens inside a location name.\n"
      "- \"B-DATE\": Marks the beginning of a date entity.\n"
      "- \"I-DATE\": Tokens inside a date entity.\n";
}

std::string render_template(const std::string& language, const std::string& examples,
                            const std::string& sentence_slot, PromptVariant variant,
                            std::size_t n_sentences) {
  const bool full = variant == PromptVariant::Default;
  std::string p;
  p += "Your task is to label entities in a given text written in " + language +
       ". Use the following labels for annotation:\n";
  p += label_block();
  p += "\n";
  if (full) p += kFormatIntroSentence;
  p += "Your task is to provide a list of named entity labels, where each label "
       "corresponds to a token. Output the tokens with their corresponding named "
       "entity labels in a JSON format, using the key 'output'. 'output' should "
       "contain a list of tokens and their entity labels in format [token, label].\n";
  p += "\n";
  p += examples;
  p += "\n\n";
  p += "Note:\n";
  if (full) p += kInputNote;
  p += "- Important: the output should be a list with the same length as the input "
       "list, where each element corresponds to the named entity label for the "
       "corresponding token. Do not change the order of tokens and do not skip them.\n";
  p += "- The named entity labels are case-sensitive, so please provide them exactly "
       "as specified (\"B-PER\", \"I-LOC\", etc.).\n";
  p += "- Follow MUC-6 (Message Understanding Conference-6) Named Entity Recognition "
       "(NER) annotation guidelines.\n";
  if (full) p += kTaskBegins;
  p += "- Output JSON only. Enclose all tokens and tags in double brackets.\n";
  if (n_sentences == 1) {
    p += "This is your sentence: " + sentence_slot + ".";
  } else {
    p += "You will annotate " + std::to_string(n_sentences) +
         " sentences in this request. The 'input' key contains an ordered array of "
         "token lists, one per sentence. Return 'output' as an ordered array with "
         "one list of [token, label] pairs per sentence, in the same order.\n";
    p += "These are your sentences: " + sentence_slot + ".";
  }
  return p;
}

}  // namespace

FewShotExamples pick_examples(const Corpus& test_split, std::uint64_t seed) {
  std::vector<const Sentence*> without;
  std::vector<const Sentence*> with;
  for (const auto& s : test_split.sentences) {
    if (!s.gold) continue;
    (entity_token_count(s) == 0 ? without : with).push_back(&s);
  }
  if (without.empty()) throw Error("pick_examples: no zero-entity example in split");
  if (with.empty()) throw Error("pick_examples: no entity-bearing example in split");
  Rng rng(derive_seed(seed, "pick-examples"));
  FewShotExamples ex;
  ex.no_entity_example = *without[rng.index(without.size())];
  ex.entity_example = *with[rng.index(with.size())];
  return ex;
}

std::string serialize_example(const Sentence& s) {
  if (!s.gold) throw Error("serialize_example: sentence '" + s.id + "' has no gold labels");
  json rec;
  rec["input"] = s.tokens;
  rec["language"] = s.language;
  json pairs = json::array();
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    pairs.push_back(json::array({s.tokens[i], (*s.gold)[i]}));
  }
  rec["output"] = pairs;
  return rec.dump();
}

std::string serialize_wire_output(const std::vector<std::string>& tokens,
                                  const std::vector<std::string>& labels) {
  json pairs = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pairs.push_back(json::array({i < tokens.size() ? tokens[i] : "", labels[i]}));
  }
  json rec;
  rec["output"] = pairs;
  return rec.dump();
}

std::string serialize_wire_output_batch(
    const std::vector<std::vector<std::string>>& tokens,
    const std::vector<std::vector<std::string>>& labels) {
  json lists = json::array();
  for (std::size_t s = 0; s < labels.size(); ++s) {
    json pairs = json::array();
    for (std::size_t i = 0; i < labels[s].size(); ++i) {
      pairs.push_back(json::array(
          {s < tokens.size() && i < tokens[s].size() ? tokens[s][i] : "", labels[s][i]}));
    }
    lists.push_back(std::move(pairs));
  }
  json rec;
  rec["output"] = lists;
  return rec.dump();
}

std::string build_prompt(const std::string& language,
                         const FewShotExamples& examples,
                         const std::vector<Sentence>& sentences,
                         PromptVariant variant) {
  if (sentences.empty() || sentences.size() > 2) {
    throw Error("build_prompt: expected 1 or 2 sentences, got " +
                std::to_string(sentences.size()));
  }
  if (examples.no_entity_example.language != language ||
      examples.entity_example.language != language) {
    throw Error("build_prompt: examples language differs from target language");
  }
  for (const auto& s : sentences) {
    if (s.language != language) {
      throw Error("build_prompt: sentence '" + s.id + "' language '" + s.language +
                  "' differs from examples language '" + language + "'");
    }
  }

  const std::string examples_block = serialize_example(examples.no_entity_example) +
                                     "\n" + serialize_example(examples.entity_example);

  json slot;
  if (sentences.size() == 1) {
    slot["input"] = sentences[0].tokens;
  } else {
    json lists = json::array();
    for (const auto& s : sentences) lists.push_back(s.tokens);
    slot["input"] = std::move(lists);
  }
  slot["language"] = language;

  return render_template(language, examples_block, slot.dump(), variant,
                         sentences.size());
}

}  // namespace alner
