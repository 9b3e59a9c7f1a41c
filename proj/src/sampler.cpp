#include "stm/sampler.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "stm/errors.hpp"
#include "stm/inference.hpp"

namespace stm {

void GibbsContext::refresh_parents(const CountState& counts) {
  const int S = hp.sentiments, L = hp.labels;
  const int32_t V = counts.vocab;
  chi_parent.resize(static_cast<size_t>(S) * V);
  for (int s = 0; s < S; ++s) {
    const double denom = counts.sent_tokens[s] + hp.delta1;
    for (int32_t w = 0; w < V; ++w) {
      chi_parent[counts.sw(s, w)] =
          (counts.sent_word[counts.sw(s, w)] + hp.delta1 * base->at(s, w)) / denom;
    }
  }
  psi_parent.resize(static_cast<size_t>(L) * S);
  for (int l = 0; l < L; ++l) {
    const double denom = counts.label_sent_tokens[l] + hp.beta1;
    for (int s = 0; s < S; ++s) {
      psi_parent[counts.ls(l, s)] =
          (counts.label_sent[counts.ls(l, s)] + hp.beta1 / S) / denom;
    }
  }
}

namespace {

// Unnormalized weights of the three token states given the document's topic.
inline std::array<double, kNumTokenStates> token_block_weights(
    int32_t w, int label, int z, const CountState& c, const GibbsContext& ctx) {
  const Hyperparams& hp = ctx.hp;
  const double eta_w = (*ctx.eta)[w];
  std::array<double, kNumTokenStates> p;
  p[kTopicWord] = (1.0 - eta_w) * (c.topic_word[c.zw(z, w)] + hp.gamma) /
                  (c.topic_tokens[z] + c.vocab * hp.gamma);
  const double psi_denom = c.label_topic_sent_tokens[c.lz(label, z)] + hp.beta2;
  for (int s = 0; s < hp.sentiments; ++s) {
    const double psi_hat =
        (c.label_topic_sent[c.lzs(label, z, s)] + hp.beta2 * ctx.psi_parent_at(label, s)) /
        psi_denom;
    const double chi_hat =
        (c.sent_topic_word[c.szw(s, z, w)] + hp.delta2 * ctx.chi_parent_at(s, w)) /
        (c.sent_topic_tokens[c.sz(s, z)] + hp.delta2);
    p[sentiment_state(s)] = eta_w * psi_hat * chi_hat;
  }
  return p;
}

// Exact collapsed log-probability of assigning (z, states) to the document,
// given the counts without it and the sweep's frozen parents; the document is
// left added to the counts. Sequential predictive evaluation, so tokens that
// share count cells within the document are priced correctly.
double score_and_add(const Document& doc, int32_t z,
                     const std::vector<uint8_t>& states, CountState& c,
                     const GibbsContext& ctx) {
  const Hyperparams& hp = ctx.hp;
  const int l = *doc.label;
  double lp = std::log((c.label_topic_docs[c.lz(l, z)] + hp.alpha) /
                       (c.docs_per_label[l] + hp.topics * hp.alpha));
  ++c.label_topic_docs[c.lz(l, z)];
  ++c.docs_per_label[l];
  for (size_t j = 0; j < doc.tokens.size(); ++j) {
    const int32_t w = doc.tokens[j];
    if (w < 0) continue;
    const double eta_w = (*ctx.eta)[w];
    if (states[j] == kTopicWord) {
      lp += std::log((1.0 - eta_w) * (c.topic_word[c.zw(z, w)] + hp.gamma) /
                     (c.topic_tokens[z] + c.vocab * hp.gamma));
      ++c.topic_word[c.zw(z, w)];
      ++c.topic_tokens[z];
    } else {
      const int s = state_sentiment(states[j]);
      const double psi_hat =
          (c.label_topic_sent[c.lzs(l, z, s)] + hp.beta2 * ctx.psi_parent_at(l, s)) /
          (c.label_topic_sent_tokens[c.lz(l, z)] + hp.beta2);
      const double chi_hat =
          (c.sent_topic_word[c.szw(s, z, w)] + hp.delta2 * ctx.chi_parent_at(s, w)) /
          (c.sent_topic_tokens[c.sz(s, z)] + hp.delta2);
      lp += std::log(eta_w * psi_hat * chi_hat);
      ++c.sent_topic_word[c.szw(s, z, w)];
      ++c.sent_topic_tokens[c.sz(s, z)];
      ++c.sent_word[c.sw(s, w)];
      ++c.sent_tokens[s];
      ++c.label_topic_sent[c.lzs(l, z, s)];
      ++c.label_topic_sent_tokens[c.lz(l, z)];
      ++c.label_sent[c.ls(l, s)];
      ++c.label_sent_tokens[l];
    }
  }
  return lp;
}

}  // namespace

std::array<double, kNumTokenStates> token_block_probs(int32_t w, int label, int z,
                                                      const CountState& counts,
                                                      const GibbsContext& ctx) {
  auto p = token_block_weights(w, label, z, counts, ctx);
  const double total = p[0] + p[1] + p[2];
  for (double& x : p) x /= total;
  return p;
}

std::vector<double> doc_topic_probs(const Document& doc, int label,
                                    const CountState& counts,
                                    const GibbsContext& ctx) {
  const Hyperparams& hp = ctx.hp;
  const int Z = hp.topics;
  std::vector<double> lp(Z);
  const double theta_denom = counts.docs_per_label[label] + Z * hp.alpha;
  for (int z = 0; z < Z; ++z) {
    lp[z] = std::log((counts.label_topic_docs[counts.lz(label, z)] + hp.alpha) /
                     theta_denom);
  }
  for (int32_t w : doc.tokens) {
    if (w < 0) continue;
    for (int z = 0; z < Z; ++z) {
      const auto p = token_block_weights(w, label, z, counts, ctx);
      lp[z] += std::log(p[0] + p[1] + p[2]);
    }
  }
  double mx = lp[0];
  for (double x : lp) mx = std::max(mx, x);
  double total = 0.0;
  for (double& x : lp) total += (x = std::exp(x - mx));
  for (double& x : lp) x /= total;
  return lp;
}

SweepStats gibbs_sweep(const Corpus& corpus, LatentState& state,
                       CountState& counts, GibbsContext& ctx, Rng& rng) {
  ctx.refresh_parents(counts);
  SweepStats stats;
  std::vector<uint8_t> proposal;
  for (size_t d = 0; d < corpus.docs.size(); ++d) {
    const Document& doc = corpus.docs[d];
    const int label = *doc.label;
    const int32_t z_old = state.doc_topic[d];
    auto& states_old = state.token_state[d];

    counts.add_document(doc, z_old, states_old, -1);

    // blocked proposal: topic with token states marginalized out, then the
    // (switch, sentiment) pair per token
    const std::vector<double> q_z = doc_topic_probs(doc, label, counts, ctx);
    const int32_t z_new = rng.categorical(q_z);
    double lq_new = std::log(q_z[z_new]);
    double lq_old = std::log(q_z[z_old]);
    proposal.resize(doc.tokens.size());
    for (size_t j = 0; j < doc.tokens.size(); ++j) {
      const int32_t w = doc.tokens[j];
      if (w < 0) {
        proposal[j] = kTopicWord;
        continue;
      }
      const auto tri_new = token_block_probs(w, label, z_new, counts, ctx);
      proposal[j] = static_cast<uint8_t>(rng.categorical(tri_new));
      lq_new += std::log(tri_new[proposal[j]]);
      const auto tri_old = z_old == z_new
                               ? tri_new
                               : token_block_probs(w, label, z_old, counts, ctx);
      lq_old += std::log(tri_old[states_old[j]]);
    }

    // accept against the exact collapsed conditional; the proposal ignores
    // intra-document count coupling, the target does not
    const double lp_old = score_and_add(doc, z_old, states_old, counts, ctx);
    counts.add_document(doc, z_old, states_old, -1);
    const double lp_new = score_and_add(doc, z_new, proposal, counts, ctx);
    ++stats.proposed;
    const double log_ratio = (lp_new - lp_old) - (lq_new - lq_old);
    if (std::log(rng.uniform01()) < log_ratio) {
      ++stats.accepted;
      state.doc_topic[d] = z_new;
      states_old.assign(proposal.begin(), proposal.end());
    } else {
      counts.add_document(doc, z_new, proposal, -1);
      counts.add_document(doc, z_old, states_old, +1);
    }
  }
  return stats;
}

double complete_data_log_joint(const Corpus& corpus, const LatentState& state,
                               const ModelArtifact& estimates) {
  double total = 0.0;
  for (size_t d = 0; d < corpus.docs.size(); ++d) {
    const Document& doc = corpus.docs[d];
    total += complete_data_log_likelihood(doc.tokens, *doc.label,
                                          state.doc_topic[d], state.token_state[d],
                                          estimates, /*include_label_prior=*/true);
  }
  return total;
}

namespace {

void accumulate(std::vector<double>& sum, const std::vector<double>& x) {
  if (sum.empty()) sum.assign(x.size(), 0.0);
  for (size_t i = 0; i < x.size(); ++i) sum[i] += x[i];
}

// mean of snapshots, renormalized row-wise
void finish_rows(std::vector<double>& v, size_t row_len, double n) {
  for (double& x : v) x /= n;
  for (size_t r = 0; r < v.size(); r += row_len) {
    double total = 0.0;
    for (size_t i = 0; i < row_len; ++i) total += v[r + i];
    for (size_t i = 0; i < row_len; ++i) v[r + i] /= total;
  }
}

}  // namespace

TrainResult train(const Corpus& corpus, const EtaTable& eta,
                  const BaseMeasures& base, const Hyperparams& hp_in,
                  const TrainOptions& options) {
  if (corpus.docs.empty()) throw EmptyCorpusError("cannot train on an empty corpus");
  const Hyperparams hp = hp_in.resolved(corpus.vocab.size());
  hp.validate();
  for (const auto& doc : corpus.docs) {
    if (!doc.label || *doc.label < 0 || *doc.label >= hp.labels) {
      throw DataError("document " + doc.id + " has no usable label");
    }
  }

  Rng rng(hp.seed);
  auto [state, counts] = init_state(corpus, eta, hp, rng);
  GibbsContext ctx{hp, &eta, &base, {}, {}};

  TrainResult result;
  ModelArtifact sums;
  int snapshots = 0;
  int64_t proposed = 0, accepted = 0;
  for (int it = 1; it <= hp.iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const SweepStats stats = gibbs_sweep(corpus, state, counts, ctx, rng);
    proposed += stats.proposed;
    accepted += stats.accepted;

    ModelArtifact estimates = point_estimates(counts, hp, base, eta, corpus.vocab);
    const double log_joint = complete_data_log_joint(corpus, state, estimates);
    result.log_joint_trace.push_back(log_joint);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (options.log_sink) options.log_sink(it, log_joint, seconds);
    if (options.progress) {
      std::fprintf(stderr, "sweep %d/%d log_joint %.4f accept %.3f (%.2fs)\n", it,
                   hp.iterations, log_joint,
                   static_cast<double>(stats.accepted) / stats.proposed, seconds);
    }

    if (it > hp.burn_in && (it - hp.burn_in - 1) % hp.thin == 0) {
      ++snapshots;
      accumulate(sums.theta, estimates.theta);
      accumulate(sums.phi, estimates.phi);
      accumulate(sums.chi_parent, estimates.chi_parent);
      accumulate(sums.chi, estimates.chi);
      accumulate(sums.psi_parent, estimates.psi_parent);
      accumulate(sums.psi, estimates.psi);
    }
  }

  const int32_t V = corpus.vocab.size();
  finish_rows(sums.theta, hp.topics, snapshots);
  finish_rows(sums.phi, V, snapshots);
  finish_rows(sums.chi_parent, V, snapshots);
  finish_rows(sums.chi, V, snapshots);
  finish_rows(sums.psi_parent, hp.sentiments, snapshots);
  finish_rows(sums.psi, hp.sentiments, snapshots);

  result.artifact = point_estimates(counts, hp, base, eta, corpus.vocab);
  result.artifact.theta = std::move(sums.theta);
  result.artifact.phi = std::move(sums.phi);
  result.artifact.chi_parent = std::move(sums.chi_parent);
  result.artifact.chi = std::move(sums.chi);
  result.artifact.psi_parent = std::move(sums.psi_parent);
  result.artifact.psi = std::move(sums.psi);
  result.final_state = std::move(state);
  result.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  return result;
}

}  // namespace stm
