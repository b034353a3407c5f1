#include "alner/corpus_io.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "alner/error.hpp"
#include "alner/labels.hpp"

namespace alner {

namespace {

using nlohmann::json;

void flush_sentence(Corpus& c, std::vector<std::string>& tokens,
                    std::vector<std::string>& tags, const std::string& stem,
                    std::size_t& ordinal) {
  if (tokens.empty()) return;
  Sentence s;
  s.id = stem + ":" + std::to_string(ordinal++);
  s.tokens = std::move(tokens);
  s.gold = std::move(tags);
  s.language = c.language;
  tokens.clear();
  tags.clear();
  c.sentences.push_back(std::move(s));
}

}  // namespace

Corpus load_conll(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  const std::string stem = std::filesystem::path(path).filename().string();

  Corpus c;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  std::size_t ordinal = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_sentence(c, tokens, tags, stem, ordinal);
      continue;
    }
    std::size_t sep = line.find_first_of("\t ");
    if (sep == std::string::npos || sep == 0 || sep + 1 >= line.size()) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": malformed line, expected 'token<sep>tag'");
    }
    std::string token = line.substr(0, sep);
    std::string tag = line.substr(sep + 1);
    if (tag.find_first_of("\t ") != std::string::npos) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": malformed line, more than two columns");
    }
    if (!is_valid_label(tag)) {
      throw Error(path + ":" + std::to_string(lineno) + ": unknown tag '" + tag + "'");
    }
    tokens.push_back(std::move(token));
    tags.push_back(std::move(tag));
  }
  flush_sentence(c, tokens, tags, stem, ordinal);
  validate_corpus(c);
  return c;
}

void save_conll(const Corpus& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (std::size_t i = 0; i < c.sentences.size(); ++i) {
    const Sentence& s = c.sentences[i];
    if (!s.gold) throw Error("save_conll: sentence '" + s.id + "' has no gold labels");
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      out << s.tokens[t] << ' ' << (*s.gold)[t] << '\n';
    }
    if (i + 1 < c.sentences.size()) out << '\n';
  }
}

Corpus load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  Corpus c;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw Error(path + ":" + std::to_string(lineno) + ": invalid JSON record");
    }
    if (!rec.contains("id") || !rec["id"].is_string()) {
      throw Error(path + ":" + std::to_string(lineno) + ": missing 'id' key");
    }
    if (!rec.contains("tokens") || !rec["tokens"].is_array()) {
      throw Error(path + ":" + std::to_string(lineno) + ": missing 'tokens' key");
    }
    Sentence s;
    s.id = rec["id"].get<std::string>();
    if (!ids.insert(s.id).second) {
      throw Error(path + ":" + std::to_string(lineno) + ": duplicate id '" + s.id + "'");
    }
    for (const auto& t : rec["tokens"]) {
      if (!t.is_string()) {
        throw Error(path + ":" + std::to_string(lineno) + ": non-string token");
      }
      s.tokens.push_back(t.get<std::string>());
    }
    if (rec.contains("gold") && !rec["gold"].is_null()) {
      if (!rec["gold"].is_array()) {
        throw Error(path + ":" + std::to_string(lineno) + ": 'gold' must be a list or null");
      }
      std::vector<std::string> gold;
      for (const auto& g : rec["gold"]) gold.push_back(g.get<std::string>());
      s.gold = std::move(gold);
    }
    s.language = rec.value("language", "");
    validate_sentence(s);
    c.sentences.push_back(std::move(s));
  }
  if (!c.sentences.empty()) c.language = c.sentences.front().language;
  return c;
}

void save_jsonl(const Corpus& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const Sentence& s : c.sentences) {
    json rec;
    rec["id"] = s.id;
    rec["tokens"] = s.tokens;
    if (s.gold) {
      rec["gold"] = *s.gold;
    } else {
      rec["gold"] = nullptr;
    }
    rec["language"] = s.language;
    out << rec.dump() << '\n';
  }
}

}  // namespace alner
