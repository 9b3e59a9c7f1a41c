#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stm/model.hpp"

namespace stm {

// p(l | z) by Bayes rule from theta and the label prior; row-major Z x L,
// each row sums to 1.
std::vector<double> label_given_topic(const ModelArtifact& artifact);

struct SentimentHistogram {
  int bins = 11;
  // per label code: percentage of included tweets per bin (centers at
  // 0%, 10%, ..., 100% for the default 11 bins)
  std::vector<std::vector<double>> percent;
  std::vector<int64_t> included;  // tweets with >= 1 sentiment token
  std::vector<int64_t> excluded;  // tweets with none
};

// Positive-sentiment fraction per tweet from the final training assignments,
// rounded half-up to the nearest bin center.
SentimentHistogram sentiment_proportion_histogram(const Corpus& corpus,
                                                  const LatentState& state,
                                                  int bins = 11);

struct TopWordEntry {
  std::string kind;  // "topic", "sentiment", "sentiment_topic"
  int topic = -1;    // -1 where not applicable
  int sentiment = -1;
  int rank = 0;
  std::string word;
  double prob = 0.0;
};

// Top-k words by phi per topic, by chi_parent per sentiment, and by chi per
// (sentiment, topic); equal probabilities break toward the lower word id.
std::vector<TopWordEntry> top_words_report(const ModelArtifact& artifact, int k);

struct PrfMetrics {
  std::vector<int64_t> confusion;  // kNumLabels x kNumLabels, row = gold
  double precision = 0.0;          // sarcastic vs rest
  double recall = 0.0;
  double f1 = 0.0;
  int64_t total = 0;

  int64_t at(int gold, int pred) const {
    return confusion[static_cast<size_t>(gold) * kNumLabels + pred];
  }
};

// 3x3 confusion matrix plus binary P/R/F1 for the sarcastic class (positive
// and negative collapse to non-sarcastic). Throws LengthMismatchError.
PrfMetrics prf_metrics(const std::vector<int>& gold, const std::vector<int>& predicted);

}  // namespace stm
