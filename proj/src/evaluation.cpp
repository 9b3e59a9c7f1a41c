#include "stm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stm/errors.hpp"

namespace stm {

std::vector<double> label_given_topic(const ModelArtifact& m) {
  const int L = m.hyper.labels, Z = m.hyper.topics;
  std::vector<double> plz(static_cast<size_t>(Z) * L);
  for (int z = 0; z < Z; ++z) {
    double total = 0.0;
    for (int l = 0; l < L; ++l) {
      const double v = m.theta_at(l, z) * m.label_prior[l];
      plz[static_cast<size_t>(z) * L + l] = v;
      total += v;
    }
    for (int l = 0; l < L; ++l) plz[static_cast<size_t>(z) * L + l] /= total;
  }
  return plz;
}

SentimentHistogram sentiment_proportion_histogram(const Corpus& corpus,
                                                  const LatentState& state,
                                                  int bins) {
  if (bins < 2) throw std::invalid_argument("bins must be >= 2");
  const int num_labels = static_cast<int>(
      std::max<size_t>(corpus.label_counts.size(), kNumLabels));
  SentimentHistogram hist;
  hist.bins = bins;
  std::vector<std::vector<int64_t>> raw(num_labels, std::vector<int64_t>(bins, 0));
  hist.included.assign(num_labels, 0);
  hist.excluded.assign(num_labels, 0);
  for (size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto& doc = corpus.docs[d];
    if (!doc.label) continue;
    const int l = *doc.label;
    int64_t sent = 0, pos = 0;
    const auto& states = state.token_state[d];
    for (size_t j = 0; j < doc.tokens.size(); ++j) {
      if (doc.tokens[j] < 0) continue;
      if (states[j] == kTopicWord) continue;
      ++sent;
      if (states[j] == kSentPos) ++pos;
    }
    if (sent == 0) {
      ++hist.excluded[l];
      continue;
    }
    ++hist.included[l];
    const double frac = static_cast<double>(pos) / static_cast<double>(sent);
    // round half-up to the nearest bin center
    int bin = static_cast<int>(std::floor(frac * (bins - 1) + 0.5));
    bin = std::clamp(bin, 0, bins - 1);
    ++raw[l][bin];
  }
  hist.percent.assign(num_labels, std::vector<double>(bins, 0.0));
  for (int l = 0; l < num_labels; ++l) {
    if (hist.included[l] == 0) continue;
    for (int b = 0; b < bins; ++b) {
      hist.percent[l][b] = 100.0 * raw[l][b] / static_cast<double>(hist.included[l]);
    }
  }
  return hist;
}

namespace {

std::vector<int32_t> top_k_ids(const double* row, int32_t v, int k) {
  std::vector<int32_t> ids(v);
  std::iota(ids.begin(), ids.end(), 0);
  const int take = std::min<int>(k, v);
  std::partial_sort(ids.begin(), ids.begin() + take, ids.end(),
                    [row](int32_t a, int32_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return a < b;
                    });
  ids.resize(take);
  return ids;
}

}  // namespace

std::vector<TopWordEntry> top_words_report(const ModelArtifact& m, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const int Z = m.hyper.topics, S = m.hyper.sentiments;
  const int32_t V = m.vocab.size();
  std::vector<TopWordEntry> report;
  for (int z = 0; z < Z; ++z) {
    const double* row = &m.phi[static_cast<size_t>(z) * V];
    int rank = 1;
    for (int32_t w : top_k_ids(row, V, k)) {
      report.push_back({"topic", z, -1, rank++, m.vocab.word(w), row[w]});
    }
  }
  for (int s = 0; s < S; ++s) {
    const double* row = &m.chi_parent[static_cast<size_t>(s) * V];
    int rank = 1;
    for (int32_t w : top_k_ids(row, V, k)) {
      report.push_back({"sentiment", -1, s, rank++, m.vocab.word(w), row[w]});
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < Z; ++z) {
      const double* row = &m.chi[(static_cast<size_t>(s) * Z + z) * V];
      int rank = 1;
      for (int32_t w : top_k_ids(row, V, k)) {
        report.push_back({"sentiment_topic", z, s, rank++, m.vocab.word(w), row[w]});
      }
    }
  }
  return report;
}

PrfMetrics prf_metrics(const std::vector<int>& gold, const std::vector<int>& predicted) {
  if (gold.size() != predicted.size()) {
    throw LengthMismatchError("gold has " + std::to_string(gold.size()) +
                              " labels, predictions have " +
                              std::to_string(predicted.size()));
  }
  PrfMetrics m;
  m.confusion.assign(static_cast<size_t>(kNumLabels) * kNumLabels, 0);
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= kNumLabels || predicted[i] < 0 ||
        predicted[i] >= kNumLabels) {
      throw DataError("label code out of range at row " + std::to_string(i + 1));
    }
    ++m.confusion[static_cast<size_t>(gold[i]) * kNumLabels + predicted[i]];
  }
  m.total = static_cast<int64_t>(gold.size());
  const int sarc = static_cast<int>(Label::Sarcastic);
  int64_t tp = 0, fp = 0, fn = 0;
  for (int g = 0; g < kNumLabels; ++g) {
    for (int p = 0; p < kNumLabels; ++p) {
      const int64_t n = m.at(g, p);
      if (g == sarc && p == sarc) tp += n;
      if (g != sarc && p == sarc) fp += n;
      if (g == sarc && p != sarc) fn += n;
    }
  }
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

}  // namespace stm
