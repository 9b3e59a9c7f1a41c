#include "stm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "stm/errors.hpp"

namespace stm {

namespace {

// Unnormalized per-token state weights under frozen artifact estimates:
// weights[z][3*j + state]. Tokens are independent given the topic, so the
// blocked (z, states) draw is exact here. Tokens are processed in sorted
// word-id order, which makes classifier output exactly invariant to token
// order within the document.
struct FrozenTables {
  int topics = 0;
  std::vector<int32_t> words;          // in-vocabulary tokens, sorted
  std::vector<size_t> src_index;       // position of each entry in the input
  std::vector<double> weights;         // Z x (3 * n)
  std::vector<double> topic_log_post;  // Z: log theta + sum_j log(sum of triple)

  double weight(int z, size_t j, uint8_t state) const {
    return weights[static_cast<size_t>(z) * words.size() * kNumTokenStates +
                   j * kNumTokenStates + state];
  }
};

FrozenTables build_tables(std::span<const int32_t> tokens, int label,
                          const ModelArtifact& m) {
  FrozenTables t;
  t.topics = m.hyper.topics;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= 0) {
      t.words.push_back(tokens[i]);
      t.src_index.push_back(i);
    }
  }
  if (t.words.empty()) {
    throw AllTokensOovError("no token of the document is in the model vocabulary");
  }
  std::vector<size_t> order(t.words.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (t.words[a] != t.words[b]) return t.words[a] < t.words[b];
    return t.src_index[a] < t.src_index[b];
  });
  std::vector<int32_t> words(t.words.size());
  std::vector<size_t> src(t.words.size());
  for (size_t i = 0; i < order.size(); ++i) {
    words[i] = t.words[order[i]];
    src[i] = t.src_index[order[i]];
  }
  t.words = std::move(words);
  t.src_index = std::move(src);
  const size_t n = t.words.size();
  t.weights.resize(static_cast<size_t>(t.topics) * n * kNumTokenStates);
  t.topic_log_post.resize(t.topics);
  for (int z = 0; z < t.topics; ++z) {
    double lp = std::log(m.theta_at(label, z));
    for (size_t j = 0; j < n; ++j) {
      const int32_t w = t.words[j];
      const double eta_w = m.eta[w];
      double* trip = &t.weights[(static_cast<size_t>(z) * n + j) * kNumTokenStates];
      trip[kTopicWord] = (1.0 - eta_w) * m.phi_at(z, w);
      for (int s = 0; s < m.hyper.sentiments; ++s) {
        trip[sentiment_state(s)] = eta_w * m.psi_at(label, z, s) * m.chi_at(s, z, w);
      }
      lp += std::log(trip[0] + trip[1] + trip[2]);
    }
    t.topic_log_post[z] = lp;
  }
  return t;
}

struct DocSample {
  int32_t z = 0;
  std::vector<uint8_t> states;
  double log_lik = 0.0;  // complete-data log-likelihood sans label prior term
};

void draw_doc_sample(const FrozenTables& t, int label, const ModelArtifact& m,
                     Rng& rng, std::vector<double>& scratch, DocSample& out) {
  out.z = rng.categorical_log(t.topic_log_post, scratch);
  out.states.resize(t.words.size());
  out.log_lik = std::log(m.theta_at(label, out.z));
  for (size_t j = 0; j < t.words.size(); ++j) {
    const double* trip =
        &t.weights[(static_cast<size_t>(out.z) * t.words.size() + j) * kNumTokenStates];
    out.states[j] = static_cast<uint8_t>(rng.categorical(std::span(trip, kNumTokenStates)));
    out.log_lik += std::log(trip[out.states[j]]);
  }
}

int argmax_label(const std::vector<double>& scores) {
  int best = 0;
  for (int l = 1; l < static_cast<int>(scores.size()); ++l) {
    if (scores[l] > scores[best]) best = l;  // ties keep the lower label
  }
  return best;
}

}  // namespace

double complete_data_log_likelihood(std::span<const int32_t> tokens, int label,
                                    int32_t z, std::span<const uint8_t> states,
                                    const ModelArtifact& m,
                                    bool include_label_prior) {
  double lp = include_label_prior ? std::log(m.label_prior[label]) : 0.0;
  lp += std::log(m.theta_at(label, z));
  size_t in_vocab = 0;
  for (size_t j = 0; j < tokens.size(); ++j) {
    const int32_t w = tokens[j];
    if (w < 0) continue;
    ++in_vocab;
    const double eta_w = m.eta[w];
    if (states[j] == kTopicWord) {
      lp += std::log((1.0 - eta_w) * m.phi_at(z, w));
    } else {
      const int s = state_sentiment(states[j]);
      lp += std::log(eta_w * m.psi_at(label, z, s) * m.chi_at(s, z, w));
    }
  }
  if (in_vocab == 0) {
    throw AllTokensOovError("no token of the document is in the model vocabulary");
  }
  return lp;
}

Prediction classify_loglik(const Document& doc, const ModelArtifact& m,
                           const LoglikParams& params, Rng& rng) {
  if (params.samples <= params.burn_in) {
    throw std::invalid_argument("samples must exceed burn_in");
  }
  const int L = m.hyper.labels;
  Prediction pred;
  pred.doc_id = doc.id;
  pred.scores.resize(L);
  std::vector<double> scratch;
  DocSample sample;
  // shared chain seed: the per-label runs see common random numbers, so a
  // label-symmetric artifact produces exactly tied scores
  const uint64_t chain_seed = rng.next_u64();
  for (int l = 0; l < L; ++l) {
    const FrozenTables tables = build_tables(doc.tokens, l, m);
    const double prior = params.include_label_prior ? std::log(m.label_prior[l]) : 0.0;
    Rng chain(chain_seed);
    double sum = 0.0;
    int kept = 0;
    for (int it = 1; it <= params.samples; ++it) {
      draw_doc_sample(tables, l, m, chain, scratch, sample);
      if (it > params.burn_in) {
        sum += prior + sample.log_lik;
        ++kept;
      }
    }
    pred.scores[l] = sum / kept;
  }
  pred.label = argmax_label(pred.scores);
  return pred;
}

Prediction classify_sampling(const Document& doc, const ModelArtifact& m,
                             const SamplingParams& params, Rng& rng) {
  if (params.sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  const int L = m.hyper.labels;
  std::vector<FrozenTables> tables;
  tables.reserve(L);
  for (int l = 0; l < L; ++l) tables.push_back(build_tables(doc.tokens, l, m));

  Prediction pred;
  pred.doc_id = doc.id;
  pred.scores.assign(L, 0.0);

  int label = rng.uniform_int(L);
  std::vector<double> scratch;
  std::vector<double> label_logp(L);
  DocSample sample;
  const int vote_from = params.mode == SamplingMode::kModeVote
                            ? std::min(params.burn_in, params.sweeps - 1)
                            : 0;
  std::vector<int64_t> votes(L, 0);
  for (int it = 1; it <= params.sweeps; ++it) {
    draw_doc_sample(tables[label], label, m, rng, scratch, sample);
    // label conditional: prior, topic affinity, and the sentiment draws;
    // phi / chi / eta factors do not depend on the label
    for (int l = 0; l < L; ++l) {
      double lp = std::log(m.label_prior[l]) + std::log(m.theta_at(l, sample.z));
      for (size_t j = 0; j < sample.states.size(); ++j) {
        if (sample.states[j] != kTopicWord) {
          lp += std::log(m.psi_at(l, sample.z, state_sentiment(sample.states[j])));
        }
      }
      label_logp[l] = lp;
    }
    label = rng.categorical_log(label_logp, scratch);
    if (it > vote_from) ++votes[label];
  }

  int64_t total_votes = 0;
  for (int64_t v : votes) total_votes += v;
  for (int l = 0; l < L; ++l) {
    pred.scores[l] = static_cast<double>(votes[l]) / total_votes;
  }
  if (params.mode == SamplingMode::kLast) {
    pred.label = label;
  } else {
    int best = 0;
    for (int l = 1; l < L; ++l) {
      if (votes[l] > votes[best]) best = l;
    }
    pred.label = best;
  }
  return pred;
}

PredictResult predict_corpus(const std::vector<Document>& docs,
                             const ModelArtifact& artifact,
                             const PredictParams& params) {
  // validate before spawning workers; only AllTokensOov may surface per doc
  if (params.method == Method::kLoglik && params.loglik.samples <= params.loglik.burn_in) {
    throw std::invalid_argument("samples must exceed burn_in");
  }
  if (params.method == Method::kSampling && params.sampling.sweeps < 1) {
    throw std::invalid_argument("sweeps must be >= 1");
  }
  PredictResult result;
  result.predictions.resize(docs.size());
  const int jobs = std::max(1, params.jobs);

  auto run_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      Rng rng = Rng::derive(params.seed, docs[i].id);
      try {
        result.predictions[i] =
            params.method == Method::kLoglik
                ? classify_loglik(docs[i], artifact, params.loglik, rng)
                : classify_sampling(docs[i], artifact, params.sampling, rng);
      } catch (const AllTokensOovError&) {
        Prediction null_pred;
        null_pred.doc_id = docs[i].id;
        null_pred.scores.assign(artifact.hyper.labels,
                                std::numeric_limits<double>::quiet_NaN());
        result.predictions[i] = std::move(null_pred);
      }
    }
  };

  if (jobs == 1 || docs.size() < 2) {
    run_range(0, docs.size());
  } else {
    std::vector<std::thread> workers;
    const size_t chunk = (docs.size() + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
      const size_t begin = std::min(docs.size(), t * chunk);
      const size_t end = std::min(docs.size(), begin + chunk);
      if (begin < end) workers.emplace_back(run_range, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  for (const auto& p : result.predictions) {
    if (!p.label) ++result.null_predictions;
  }
  return result;
}

std::pair<int32_t, std::vector<uint8_t>> sample_assignments(
    const Document& doc, int label, const ModelArtifact& artifact, Rng& rng) {
  const FrozenTables tables = build_tables(doc.tokens, label, artifact);
  std::vector<double> scratch;
  DocSample sample;
  draw_doc_sample(tables, label, artifact, rng, scratch, sample);
  std::vector<uint8_t> states(doc.tokens.size(), kTopicWord);
  for (size_t j = 0; j < tables.src_index.size(); ++j) {
    states[tables.src_index[j]] = sample.states[j];
  }
  return {sample.z, std::move(states)};
}

std::vector<int32_t> encode_tokens(const std::vector<std::string>& tokens,
                                   const Vocabulary& vocab) {
  std::vector<int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto id = vocab.id_of(t);
    ids.push_back(id ? *id : -1);
  }
  return ids;
}

}  // namespace stm
