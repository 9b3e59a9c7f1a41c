#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stm/corpus.hpp"

namespace stm {

// One (pos, neg) score pair per word sense; scores in [0,1], pos+neg <= 1.
struct LexiconEntry {
  std::vector<std::pair<double, double>> senses;
};

using Lexicon = std::unordered_map<std::string, LexiconEntry>;

// TSV rows: word <TAB> pos_score <TAB> neg_score, one row per sense.
Lexicon load_lexicon(const std::string& path);

// Per word id: probability that the word is a sentiment word.
using EtaTable = std::vector<double>;

// eta_w = mean over senses of (pos + neg), clamped to [0,1];
// words absent from the lexicon get default_eta.
EtaTable estimate_eta(const Vocabulary& vocab, const Lexicon& lexicon,
                      double default_eta = 0.1);

// Normalized base measures over the vocabulary for the two sentiment-word
// priors; row-major [sentiment][word].
struct BaseMeasures {
  int sentiments = 2;
  int vocab_size = 0;
  std::vector<double> weights;  // sentiments x vocab_size, rows sum to 1

  double at(int s, int32_t w) const { return weights[static_cast<size_t>(s) * vocab_size + w]; }
};

// Unnormalized weight of w under sentiment s is 1 + boost * [w in list_s].
BaseMeasures build_base_measures(const Vocabulary& vocab,
                                 const std::unordered_set<std::string>& pos_list,
                                 const std::unordered_set<std::string>& neg_list,
                                 double boost = 4.0);

std::unordered_set<std::string> load_word_list(const std::string& path);

}  // namespace stm
