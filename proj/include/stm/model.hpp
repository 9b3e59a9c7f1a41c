#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stm/corpus.hpp"
#include "stm/lexicon.hpp"
#include "stm/rng.hpp"

namespace stm {

struct Hyperparams {
  int topics = 50;      // Z
  int sentiments = 2;   // S
  int labels = 3;       // L
  double alpha = 1.0;   // doc-topic prior
  double beta1 = 1.0;   // parent sentiment prior (total concentration)
  double beta2 = 1.0;   // child sentiment prior (total concentration)
  double gamma = 0.01;  // topic-word prior (per word)
  double delta1 = 0.0;  // parent sentiment-word prior; <= 0 means 0.1 * V
  double delta2 = 0.0;  // child sentiment-word prior; <= 0 means 0.1 * V
  int iterations = 1000;
  int burn_in = 500;
  int thin = 10;
  uint64_t seed = 0;

  // Fills the auto deltas for a concrete vocabulary size.
  Hyperparams resolved(int32_t vocab_size) const;
  // Throws std::invalid_argument on a bad setting (flag-level error).
  void validate() const;
};

// Per-token latent state: a token is either a topic word or a sentiment word
// with one of two polarities.
enum : uint8_t {
  kTopicWord = 0,
  kSentPos = 1,
  kSentNeg = 2,
};
inline constexpr int kNumTokenStates = 3;
inline int state_sentiment(uint8_t state) { return state - 1; }
inline uint8_t sentiment_state(int s) { return static_cast<uint8_t>(1 + s); }

struct LatentState {
  std::vector<int32_t> doc_topic;                 // per document: z
  std::vector<std::vector<uint8_t>> token_state;  // per document, per token
};

// Sufficient statistics for the collapsed sampler. All tensors are flat
// row-major with the dimensions given in the comments.
struct CountState {
  int labels = 0, topics = 0, sentiments = 0;
  int32_t vocab = 0;

  std::vector<int32_t> label_topic_docs;   // L x Z   docs with label l, topic z
  std::vector<int32_t> docs_per_label;     // L
  std::vector<int32_t> topic_word;         // Z x V   topic-word tokens
  std::vector<int32_t> topic_tokens;       // Z
  std::vector<int32_t> sent_topic_word;    // S x Z x V   sentiment-word tokens
  std::vector<int32_t> sent_topic_tokens;  // S x Z
  std::vector<int32_t> sent_word;          // S x V   parent level (topics pooled)
  std::vector<int32_t> sent_tokens;        // S
  std::vector<int32_t> label_topic_sent;   // L x Z x S  sentiment draws
  std::vector<int32_t> label_topic_sent_tokens;  // L x Z
  std::vector<int32_t> label_sent;         // L x S   parent level
  std::vector<int32_t> label_sent_tokens;  // L

  CountState() = default;
  CountState(int labels, int topics, int sentiments, int32_t vocab);

  void add_document(const Document& doc, int32_t z,
                    const std::vector<uint8_t>& states, int direction);

  int64_t total_tokens() const;
  bool operator==(const CountState&) const = default;

  size_t lz(int l, int z) const { return static_cast<size_t>(l) * topics + z; }
  size_t zw(int z, int32_t w) const { return static_cast<size_t>(z) * vocab + w; }
  size_t szw(int s, int z, int32_t w) const {
    return (static_cast<size_t>(s) * topics + z) * vocab + w;
  }
  size_t sz(int s, int z) const { return static_cast<size_t>(s) * topics + z; }
  size_t sw(int s, int32_t w) const { return static_cast<size_t>(s) * vocab + w; }
  size_t lzs(int l, int z, int s) const {
    return (static_cast<size_t>(l) * topics + z) * sentiments + s;
  }
  size_t ls(int l, int s) const { return static_cast<size_t>(l) * sentiments + s; }
};

// Rebuilds counts from scratch; the audit is exact equality with the
// maintained state.
CountState recompute_counts(const Corpus& corpus, const LatentState& state,
                            const Hyperparams& hp);

// z uniform per document, switch Bernoulli(eta_w) per token, sentiment
// uniform per sentiment token.
std::pair<LatentState, CountState> init_state(const Corpus& corpus,
                                              const EtaTable& eta,
                                              const Hyperparams& hp, Rng& rng);

// Posterior point estimates plus everything needed to score unseen text.
struct ModelArtifact {
  Hyperparams hyper;
  Vocabulary vocab;
  EtaTable eta;
  BaseMeasures base;
  std::vector<double> theta;        // L x Z
  std::vector<double> phi;          // Z x V
  std::vector<double> chi_parent;   // S x V
  std::vector<double> chi;          // S x Z x V
  std::vector<double> psi_parent;   // L x S
  std::vector<double> psi;          // L x Z x S
  std::vector<double> label_prior;  // L
  std::map<std::string, std::string> config_echo;

  double theta_at(int l, int z) const { return theta[static_cast<size_t>(l) * hyper.topics + z]; }
  double phi_at(int z, int32_t w) const { return phi[static_cast<size_t>(z) * vocab.size() + w]; }
  double chi_parent_at(int s, int32_t w) const {
    return chi_parent[static_cast<size_t>(s) * vocab.size() + w];
  }
  double chi_at(int s, int z, int32_t w) const {
    return chi[(static_cast<size_t>(s) * hyper.topics + z) * vocab.size() + w];
  }
  double psi_parent_at(int l, int s) const {
    return psi_parent[static_cast<size_t>(l) * hyper.sentiments + s];
  }
  double psi_at(int l, int z, int s) const {
    return psi[(static_cast<size_t>(l) * hyper.topics + z) * hyper.sentiments + s];
  }
};

ModelArtifact point_estimates(const CountState& counts, const Hyperparams& hp,
                              const BaseMeasures& base, const EtaTable& eta,
                              const Vocabulary& vocab);

// Versioned, checksummed JSON. load(save(x)) reproduces every array exactly.
void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

}  // namespace stm
