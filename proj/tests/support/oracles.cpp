#include "oracles.hpp"

#include <cassert>
#include <cmath>

namespace stm::test {

double log_dirmult(const std::vector<int>& counts, const std::vector<double>& conc) {
  assert(counts.size() == conc.size());
  double lp = 0.0, n = 0.0, a = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    lp += std::lgamma(counts[i] + conc[i]) - std::lgamma(conc[i]);
    n += counts[i];
    a += conc[i];
  }
  return lp - (std::lgamma(n + a) - std::lgamma(a));
}

Hyperparams TinyInstance::hyperparams(double pin) const {
  Hyperparams hp;
  hp.topics = topics;
  hp.sentiments = sentiments;
  hp.labels = labels;
  hp.alpha = alpha;
  hp.gamma = gamma;
  hp.delta2 = delta2;
  hp.beta2 = beta2;
  hp.delta1 = pin;
  hp.beta1 = pin;
  return hp;
}

uint64_t encode_blob(int32_t z, const std::vector<uint8_t>& states) {
  uint64_t key = 0, mult = 1;
  for (uint8_t s : states) {
    key += s * mult;
    mult *= 3;
  }
  return key + static_cast<uint64_t>(z) * mult;
}

namespace {

// log joint of one full configuration, each component scored in closed form
double config_log_joint(const TinyInstance& in, const std::vector<int32_t>& zs,
                        const std::vector<std::vector<uint8_t>>& states) {
  const int Z = in.topics, S = in.sentiments, L = in.labels;
  const int32_t V = in.vocab;
  const size_t D = in.docs.size();

  std::vector<std::vector<int>> label_topic(L, std::vector<int>(Z, 0));
  std::vector<std::vector<int>> topic_word(Z, std::vector<int>(V, 0));
  std::vector<std::vector<int>> sent_word(S * Z, std::vector<int>(V, 0));
  std::vector<std::vector<int>> label_sent(L * Z, std::vector<int>(S, 0));
  double lp = 0.0;

  for (size_t d = 0; d < D; ++d) {
    const auto& [label, words] = in.docs[d];
    const int32_t z = zs[d];
    ++label_topic[label][z];
    for (size_t j = 0; j < words.size(); ++j) {
      const int32_t w = words[j];
      if (states[d][j] == kTopicWord) {
        lp += std::log(1.0 - in.eta[w]);
        ++topic_word[z][w];
      } else {
        lp += std::log(in.eta[w]);
        const int s = state_sentiment(states[d][j]);
        ++sent_word[s * Z + z][w];
        ++label_sent[label * Z + z][s];
      }
    }
  }

  for (int l = 0; l < L; ++l) {
    lp += log_dirmult(label_topic[l], std::vector<double>(Z, in.alpha));
  }
  for (int z = 0; z < Z; ++z) {
    lp += log_dirmult(topic_word[z], std::vector<double>(V, in.gamma));
  }
  for (int s = 0; s < S; ++s) {
    std::vector<double> conc(V);
    for (int32_t w = 0; w < V; ++w) {
      conc[w] = in.delta2 * in.chi_parent[static_cast<size_t>(s) * V + w];
    }
    for (int z = 0; z < Z; ++z) {
      lp += log_dirmult(sent_word[s * Z + z], conc);
    }
  }
  {
    std::vector<double> conc(S);
    for (int s = 0; s < S; ++s) conc[s] = in.beta2 * in.psi_parent[s];
    for (int l = 0; l < L; ++l) {
      for (int z = 0; z < Z; ++z) {
        lp += log_dirmult(label_sent[l * Z + z], conc);
      }
    }
  }
  return lp;
}

// Odometer over the per-token state spaces of all documents. A token with
// eta 0 or 1 only has feasible states on its own side of the switch.
struct ConfigIterator {
  const TinyInstance& in;
  std::vector<std::vector<std::vector<uint8_t>>> feasible;  // per doc, per token
  std::vector<int32_t> zs;
  std::vector<std::vector<size_t>> idx;
  std::vector<std::vector<uint8_t>> states;
  bool done = false;

  explicit ConfigIterator(const TinyInstance& instance) : in(instance) {
    for (const auto& [label, words] : in.docs) {
      (void)label;
      std::vector<std::vector<uint8_t>> doc_feasible;
      for (int32_t w : words) {
        std::vector<uint8_t> f;
        if (in.eta[w] < 1.0) f.push_back(kTopicWord);
        if (in.eta[w] > 0.0) {
          f.push_back(kSentPos);
          f.push_back(kSentNeg);
        }
        doc_feasible.push_back(std::move(f));
      }
      feasible.push_back(std::move(doc_feasible));
      idx.emplace_back(feasible.back().size(), 0);
    }
    zs.assign(in.docs.size(), 0);
    refresh();
  }

  void refresh() {
    states.clear();
    for (size_t d = 0; d < in.docs.size(); ++d) {
      std::vector<uint8_t> s;
      for (size_t j = 0; j < idx[d].size(); ++j) {
        s.push_back(feasible[d][j][idx[d][j]]);
      }
      states.push_back(std::move(s));
    }
  }

  void advance() {
    for (size_t d = 0; d < in.docs.size(); ++d) {
      for (size_t j = 0; j < idx[d].size(); ++j) {
        if (++idx[d][j] < feasible[d][j].size()) {
          refresh();
          return;
        }
        idx[d][j] = 0;
      }
      if (++zs[d] < in.topics) {
        refresh();
        return;
      }
      zs[d] = 0;
    }
    done = true;
  }
};

}  // namespace

EnumerationResult enumerate_posterior(const TinyInstance& in) {
  const size_t D = in.docs.size();
  const int Z = in.topics;
  std::vector<double> log_joints;
  std::vector<std::vector<int32_t>> all_zs;
  std::vector<std::vector<uint64_t>> all_keys;

  for (ConfigIterator it(in); !it.done; it.advance()) {
    log_joints.push_back(config_log_joint(in, it.zs, it.states));
    all_zs.push_back(it.zs);
    std::vector<uint64_t> keys(D);
    for (size_t d = 0; d < D; ++d) keys[d] = encode_blob(it.zs[d], it.states[d]);
    all_keys.push_back(std::move(keys));
  }

  double mx = log_joints[0];
  for (double lp : log_joints) mx = std::max(mx, lp);
  double total = 0.0;
  for (double& lp : log_joints) total += (lp = std::exp(lp - mx));

  EnumerationResult result;
  result.doc_topic_marginal.assign(D * Z, 0.0);
  result.blob_marginal.resize(D);
  for (size_t c = 0; c < log_joints.size(); ++c) {
    const double p = log_joints[c] / total;
    for (size_t d = 0; d < D; ++d) {
      result.doc_topic_marginal[d * Z + all_zs[c][d]] += p;
      result.blob_marginal[d][all_keys[c][d]] += p;
    }
  }
  return result;
}

namespace {

// enumerate (z, states) for one document under a frozen artifact; calls fn
// with (z, states, posterior weight, complete-data log-likelihood)
template <typename Fn>
void for_each_frozen_config(const Document& doc, int label,
                            const ModelArtifact& m, bool include_label_prior,
                            Fn&& fn) {
  std::vector<int32_t> words;
  for (int32_t w : doc.tokens) {
    if (w >= 0) words.push_back(w);
  }
  const size_t n = words.size();
  const int Z = m.hyper.topics;
  std::vector<uint8_t> states(n, 0);
  const double prior = include_label_prior ? std::log(m.label_prior[label]) : 0.0;
  for (int z = 0; z < Z; ++z) {
    states.assign(n, 0);
    while (true) {
      double ll = prior + std::log(m.theta_at(label, z));
      bool feasible = true;
      for (size_t j = 0; j < n; ++j) {
        const int32_t w = words[j];
        double term;
        if (states[j] == kTopicWord) {
          term = (1.0 - m.eta[w]) * m.phi_at(z, w);
        } else {
          const int s = state_sentiment(states[j]);
          term = m.eta[w] * m.psi_at(label, z, s) * m.chi_at(s, z, w);
        }
        if (term <= 0.0) {
          feasible = false;
          break;
        }
        ll += std::log(term);
      }
      if (feasible) fn(z, states, ll);
      size_t j = 0;
      while (j < n && ++states[j] == kNumTokenStates) states[j++] = 0;
      if (j == n) break;
    }
  }
}

}  // namespace

double exact_mean_loglik(const Document& doc, int label, const ModelArtifact& m,
                         bool include_label_prior) {
  // first pass for the max, second for weights and the weighted mean
  double mx = -HUGE_VAL;
  for_each_frozen_config(doc, label, m, include_label_prior,
                         [&](int, const std::vector<uint8_t>&, double ll) {
                           mx = std::max(mx, ll);
                         });
  double total = 0.0, weighted = 0.0;
  for_each_frozen_config(doc, label, m, include_label_prior,
                         [&](int, const std::vector<uint8_t>&, double ll) {
                           const double w = std::exp(ll - mx);
                           total += w;
                           weighted += w * ll;
                         });
  return weighted / total;
}

std::vector<double> exact_label_posterior(const Document& doc,
                                          const ModelArtifact& m) {
  const int L = m.hyper.labels;
  std::vector<double> mass(L, 0.0);
  double mx = -HUGE_VAL;
  for (int l = 0; l < L; ++l) {
    for_each_frozen_config(doc, l, m, true,
                           [&](int, const std::vector<uint8_t>&, double ll) {
                             mx = std::max(mx, ll);
                           });
  }
  for (int l = 0; l < L; ++l) {
    for_each_frozen_config(doc, l, m, true,
                           [&](int, const std::vector<uint8_t>&, double ll) {
                             mass[l] += std::exp(ll - mx);
                           });
  }
  double total = 0.0;
  for (double v : mass) total += v;
  for (double& v : mass) v /= total;
  return mass;
}

double chi_square_uniform(const std::vector<int64_t>& observed) {
  int64_t total = 0;
  for (int64_t o : observed) total += o;
  const double expected = static_cast<double>(total) / observed.size();
  double stat = 0.0;
  for (int64_t o : observed) {
    const double d = o - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace stm::test
