#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace stm {

// Tweet-level class label. Integer codes are fixed (0, 1, 2); the order is
// also the deterministic tie-break order everywhere a tie can occur.
enum class Label : int { Positive = 0, Negative = 1, Sarcastic = 2 };

inline constexpr int kNumLabels = 3;

const char* label_name(Label l);
const char* label_name(int code);
std::optional<Label> label_from_name(const std::string& name);

// Bijective word <-> id map with per-word corpus frequencies. Ids are
// contiguous, 0-based, and assigned in first-appearance order.
class Vocabulary {
 public:
  int32_t add(const std::string& word, int64_t freq);
  std::optional<int32_t> id_of(const std::string& word) const;
  const std::string& word(int32_t id) const { return words_.at(id); }
  int64_t freq(int32_t id) const { return freq_.at(id); }
  int32_t size() const { return static_cast<int32_t>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<int64_t> freq_;
  std::unordered_map<std::string, int32_t> index_;
};

struct Document {
  std::string id;
  std::vector<int32_t> tokens;  // word ids; -1 marks an out-of-vocabulary skip
  std::optional<int> label;     // absent at prediction time
};

struct Corpus {
  Vocabulary vocab;
  std::vector<Document> docs;
  std::vector<int64_t> label_counts;  // indexed by label code

  int64_t total_tokens() const;
  void recount_labels();
};

// hashtag (lowercase, no '#') -> label
using HashtagRules = std::map<std::string, Label>;

HashtagRules default_hashtag_rules();
HashtagRules load_hashtag_rules(const std::string& path);

using FunctionWords = std::unordered_set<std::string>;
FunctionWords load_function_words(const std::string& path);

// Returns the label whose supervision hashtags appear in the raw text, or
// nullopt when none appears or hashtags of more than one label appear.
std::optional<Label> label_from_hashtags(const std::string& raw_text,
                                         const HashtagRules& rules);

// Lowercases, drops @mentions / #hashtags / URLs / pure punctuation, strips
// punctuation characters from the remaining tokens, and removes function
// words. Token order is preserved.
std::vector<std::string> preprocess_text(const std::string& raw_text,
                                         const FunctionWords& function_words);

struct RawRecord {
  std::string id;
  std::string text;
  std::optional<Label> label;  // set when the source is pre-labeled
};

struct CorpusOptions {
  int min_count = 3;
  int min_doc_len = 3;
};

// Full pipeline: retweet/duplicate removal, supervision, preprocessing,
// vocabulary pruning (before the document-length filter), id encoding.
// Deterministic given record order. Throws EmptyCorpusError if nothing
// survives.
Corpus build_corpus(const std::vector<RawRecord>& records,
                    const HashtagRules& rules,
                    const FunctionWords& function_words,
                    const CorpusOptions& options);

// JSONL: one {"id": ..., "text": ...} object per line (label via hashtags).
std::vector<RawRecord> load_jsonl_records(const std::string& path);
// TSV: "label<TAB>text" per line, bypassing hashtag supervision.
std::vector<RawRecord> load_tsv_records(const std::string& path);

void save_corpus(const Corpus& corpus, const std::string& path,
                 const std::map<std::string, std::string>& config_echo);
Corpus load_corpus(const std::string& path);

}  // namespace stm
