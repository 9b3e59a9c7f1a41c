#include "stm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "stm/errors.hpp"
#include "stm/text_io.hpp"

namespace stm {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kCorpusFormatVersion = 1;
constexpr const char* kCorpusFormatName = "stm.corpus";

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> whitespace_split(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_url(const std::string& tok) {
  return tok.rfind("http://", 0) == 0 || tok.rfind("https://", 0) == 0 ||
         tok.rfind("www.", 0) == 0;
}

std::string strip_punct(const std::string& tok) {
  std::string out;
  out.reserve(tok.size());
  for (char c : tok) {
    if (!is_punct(c)) out.push_back(c);
  }
  return out;
}

// "#Sarcasm!!" -> "sarcasm"; assumes tok starts with '#'
std::string hashtag_body(const std::string& tok) {
  std::string body = tok.substr(1);
  while (!body.empty() && is_punct(body.back())) body.pop_back();
  return body;
}

std::string normalize_for_dedup(const std::string& text) {
  std::string joined;
  for (const auto& tok : whitespace_split(lowercase_ascii(text))) {
    if (!joined.empty()) joined.push_back(' ');
    joined += tok;
  }
  return joined;
}

bool is_retweet(const std::string& normalized) {
  return normalized == "rt" || normalized.rfind("rt ", 0) == 0;
}

}  // namespace

const char* label_name(Label l) { return label_name(static_cast<int>(l)); }

const char* label_name(int code) {
  switch (code) {
    case 0: return "positive";
    case 1: return "negative";
    case 2: return "sarcastic";
    default: return "unknown";
  }
}

std::optional<Label> label_from_name(const std::string& name) {
  const std::string n = lowercase_ascii(name);
  if (n == "positive" || n == "0") return Label::Positive;
  if (n == "negative" || n == "1") return Label::Negative;
  if (n == "sarcastic" || n == "sarcasm" || n == "2") return Label::Sarcastic;
  return std::nullopt;
}

int32_t Vocabulary::add(const std::string& word, int64_t freq) {
  auto [it, inserted] = index_.emplace(word, static_cast<int32_t>(words_.size()));
  if (!inserted) {
    freq_[it->second] += freq;
    return it->second;
  }
  words_.push_back(word);
  freq_.push_back(freq);
  return it->second;
}

std::optional<int32_t> Vocabulary::id_of(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int64_t Corpus::total_tokens() const {
  int64_t n = 0;
  for (const auto& d : docs) n += static_cast<int64_t>(d.tokens.size());
  return n;
}

void Corpus::recount_labels() {
  int max_code = kNumLabels - 1;
  for (const auto& d : docs) {
    if (d.label) max_code = std::max(max_code, *d.label);
  }
  label_counts.assign(max_code + 1, 0);
  for (const auto& d : docs) {
    if (d.label) ++label_counts[*d.label];
  }
}

HashtagRules default_hashtag_rules() {
  return {
      {"happy", Label::Positive},    {"excited", Label::Positive},
      {"sad", Label::Negative},      {"angry", Label::Negative},
      {"sarcasm", Label::Sarcastic}, {"sarcastic", Label::Sarcastic},
  };
}

HashtagRules load_hashtag_rules(const std::string& path) {
  HashtagRules rules;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2) {
      throw ParseError(path, i + 1, "expected: hashtag<TAB>label");
    }
    std::string tag = lowercase_ascii(fields[0]);
    if (!tag.empty() && tag[0] == '#') tag = tag.substr(1);
    if (tag.empty()) throw ParseError(path, i + 1, "empty hashtag");
    const auto label = label_from_name(fields[1]);
    if (!label) throw ParseError(path, i + 1, "unknown label: " + fields[1]);
    rules[tag] = *label;
  }
  return rules;
}

FunctionWords load_function_words(const std::string& path) {
  FunctionWords words;
  for (auto& line : read_lines(path)) {
    const std::string w = lowercase_ascii(line);
    if (!w.empty()) words.insert(w);
  }
  return words;
}

std::optional<Label> label_from_hashtags(const std::string& raw_text,
                                         const HashtagRules& rules) {
  std::optional<Label> found;
  for (const auto& tok : whitespace_split(lowercase_ascii(raw_text))) {
    if (tok.size() < 2 || tok[0] != '#') continue;
    auto it = rules.find(hashtag_body(tok));
    if (it == rules.end()) continue;
    if (found && *found != it->second) return std::nullopt;  // conflicting supervision
    found = it->second;
  }
  return found;
}

std::vector<std::string> preprocess_text(const std::string& raw_text,
                                         const FunctionWords& function_words) {
  std::vector<std::string> out;
  for (const auto& tok : whitespace_split(lowercase_ascii(raw_text))) {
    if (tok[0] == '@' || tok[0] == '#' || is_url(tok)) continue;
    std::string word = strip_punct(tok);
    if (word.empty()) continue;
    if (function_words.count(word)) continue;
    out.push_back(std::move(word));
  }
  return out;
}

Corpus build_corpus(const std::vector<RawRecord>& records,
                    const HashtagRules& rules,
                    const FunctionWords& function_words,
                    const CorpusOptions& options) {
  if (options.min_count < 1 || options.min_doc_len < 1) {
    throw std::invalid_argument("min_count and min_doc_len must be >= 1");
  }

  struct Kept {
    std::string id;
    int label;
    std::vector<std::string> words;
  };
  std::vector<Kept> kept;
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    const std::string norm = normalize_for_dedup(rec.text);
    if (is_retweet(norm)) continue;
    if (!seen.insert(norm).second) continue;
    std::optional<Label> label = rec.label ? rec.label : label_from_hashtags(rec.text, rules);
    if (!label) continue;
    kept.push_back({rec.id, static_cast<int>(*label), preprocess_text(rec.text, function_words)});
  }

  // frequency pass, then prune below min_count; ids in first-appearance order
  std::unordered_map<std::string, int64_t> freq;
  for (const auto& k : kept) {
    for (const auto& w : k.words) ++freq[w];
  }
  Corpus corpus;
  for (const auto& k : kept) {
    for (const auto& w : k.words) {
      auto it = freq.find(w);
      if (it != freq.end() && it->second >= options.min_count) {
        corpus.vocab.add(w, it->second);
        freq.erase(it);  // count once
      }
    }
  }

  // encode, then drop documents that fell below min_doc_len
  for (auto& k : kept) {
    Document doc;
    doc.id = std::move(k.id);
    doc.label = k.label;
    for (const auto& w : k.words) {
      if (auto id = corpus.vocab.id_of(w)) doc.tokens.push_back(*id);
    }
    if (static_cast<int>(doc.tokens.size()) < options.min_doc_len) continue;
    corpus.docs.push_back(std::move(doc));
  }
  if (corpus.docs.empty()) {
    throw EmptyCorpusError("no documents survived corpus construction");
  }
  corpus.recount_labels();
  return corpus;
}

std::vector<RawRecord> load_jsonl_records(const std::string& path) {
  std::vector<RawRecord> records;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, i + 1, std::string("bad JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string()) {
      throw ParseError(path, i + 1, "expected an object with a string \"text\" field");
    }
    RawRecord rec;
    rec.text = obj["text"].get<std::string>();
    rec.id = obj.contains("id") && obj["id"].is_string()
                 ? obj["id"].get<std::string>()
                 : "d" + std::to_string(i + 1);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> load_tsv_records(const std::string& path) {
  std::vector<RawRecord> records;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2) {
      throw ParseError(path, i + 1, "expected: label<TAB>text");
    }
    const auto label = label_from_name(fields[0]);
    if (!label) throw ParseError(path, i + 1, "unknown label: " + fields[0]);
    records.push_back({"d" + std::to_string(i + 1), fields[1], label});
  }
  return records;
}

void save_corpus(const Corpus& corpus, const std::string& path,
                 const std::map<std::string, std::string>& config_echo) {
  ordered_json j;
  j["format"] = kCorpusFormatName;
  j["version"] = kCorpusFormatVersion;
  j["config"] = ordered_json::object();
  for (const auto& [k, v] : config_echo) j["config"][k] = v;
  j["vocabulary"] = corpus.vocab.words();
  auto freqs = ordered_json::array();
  for (int32_t w = 0; w < corpus.vocab.size(); ++w) freqs.push_back(corpus.vocab.freq(w));
  j["frequencies"] = std::move(freqs);
  j["label_counts"] = corpus.label_counts;
  auto docs = ordered_json::array();
  for (const auto& d : corpus.docs) {
    ordered_json dj;
    dj["id"] = d.id;
    if (d.label) {
      dj["label"] = *d.label;
    } else {
      dj["label"] = nullptr;
    }
    dj["tokens"] = d.tokens;
    docs.push_back(std::move(dj));
  }
  j["documents"] = std::move(docs);
  atomic_write_file(path, j.dump(1) + "\n");
}

Corpus load_corpus(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(path + ": not a valid corpus file: " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kCorpusFormatName) {
    throw CorruptFileError(path + ": not a corpus file");
  }
  if (j.value("version", -1) != kCorpusFormatVersion) {
    throw VersionMismatchError(path + ": corpus format version " +
                               j["version"].dump() + ", expected " +
                               std::to_string(kCorpusFormatVersion));
  }
  try {
    Corpus corpus;
    const auto& words = j.at("vocabulary");
    const auto& freqs = j.at("frequencies");
    for (size_t w = 0; w < words.size(); ++w) {
      corpus.vocab.add(words[w].get<std::string>(), freqs.at(w).get<int64_t>());
    }
    for (const auto& dj : j.at("documents")) {
      Document d;
      d.id = dj.at("id").get<std::string>();
      if (!dj.at("label").is_null()) d.label = dj["label"].get<int>();
      for (const auto& t : dj.at("tokens")) {
        const auto id = t.get<int32_t>();
        if (id < -1 || id >= corpus.vocab.size()) {
          throw CorruptFileError(path + ": token id out of range in document " + d.id);
        }
        d.tokens.push_back(id);
      }
      corpus.docs.push_back(std::move(d));
    }
    corpus.label_counts = j.at("label_counts").get<std::vector<int64_t>>();
    return corpus;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(path + ": malformed corpus file: " + e.what());
  }
}

}  // namespace stm
