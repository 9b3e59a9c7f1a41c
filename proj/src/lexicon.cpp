#include "stm/lexicon.hpp"

#include <algorithm>
#include <cstdlib>

#include "stm/errors.hpp"
#include "stm/text_io.hpp"

namespace stm {

namespace {

double parse_score(const std::string& field, const std::string& path, size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    throw ParseError(path, line, "not a number: " + field);
  }
  if (v < 0.0 || v > 1.0) {
    throw ParseError(path, line, "score out of [0,1]: " + field);
  }
  return v;
}

}  // namespace

Lexicon load_lexicon(const std::string& path) {
  Lexicon lex;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 3) {
      throw ParseError(path, i + 1, "expected: word<TAB>pos_score<TAB>neg_score");
    }
    const double pos = parse_score(fields[1], path, i + 1);
    const double neg = parse_score(fields[2], path, i + 1);
    if (pos + neg > 1.0 + 1e-12) {
      throw ParseError(path, i + 1, "pos + neg exceeds 1");
    }
    lex[lowercase_ascii(fields[0])].senses.emplace_back(pos, neg);
  }
  return lex;
}

EtaTable estimate_eta(const Vocabulary& vocab, const Lexicon& lexicon,
                      double default_eta) {
  EtaTable eta(vocab.size(), default_eta);
  for (int32_t w = 0; w < vocab.size(); ++w) {
    auto it = lexicon.find(vocab.word(w));
    if (it == lexicon.end() || it->second.senses.empty()) continue;
    double sum = 0.0;
    for (const auto& [pos, neg] : it->second.senses) sum += pos + neg;
    eta[w] = std::clamp(sum / static_cast<double>(it->second.senses.size()), 0.0, 1.0);
  }
  return eta;
}

BaseMeasures build_base_measures(const Vocabulary& vocab,
                                 const std::unordered_set<std::string>& pos_list,
                                 const std::unordered_set<std::string>& neg_list,
                                 double boost) {
  if (boost < 0.0) throw std::invalid_argument("boost must be >= 0");
  BaseMeasures base;
  base.sentiments = 2;
  base.vocab_size = vocab.size();
  base.weights.resize(static_cast<size_t>(2) * vocab.size());
  for (int s = 0; s < 2; ++s) {
    const auto& list = s == 0 ? pos_list : neg_list;
    double total = 0.0;
    for (int32_t w = 0; w < vocab.size(); ++w) {
      const double weight = 1.0 + (list.count(vocab.word(w)) ? boost : 0.0);
      base.weights[static_cast<size_t>(s) * vocab.size() + w] = weight;
      total += weight;
    }
    for (int32_t w = 0; w < vocab.size(); ++w) {
      base.weights[static_cast<size_t>(s) * vocab.size() + w] /= total;
    }
  }
  return base;
}

std::unordered_set<std::string> load_word_list(const std::string& path) {
  std::unordered_set<std::string> words;
  for (auto& line : read_lines(path)) {
    const std::string w = lowercase_ascii(line);
    if (!w.empty() && w[0] != '#') words.insert(w);
  }
  return words;
}

}  // namespace stm
