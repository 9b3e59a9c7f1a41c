#include "stm/model.hpp"

#include <cassert>
#include <stdexcept>

#include <json.hpp>

#include "stm/errors.hpp"
#include "stm/text_io.hpp"

namespace stm {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatName = "stm.model";

}  // namespace

Hyperparams Hyperparams::resolved(int32_t vocab_size) const {
  Hyperparams hp = *this;
  if (hp.delta1 <= 0.0) hp.delta1 = 0.1 * vocab_size;
  if (hp.delta2 <= 0.0) hp.delta2 = 0.1 * vocab_size;
  return hp;
}

void Hyperparams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  positive(alpha, "alpha");
  positive(beta1, "beta1");
  positive(beta2, "beta2");
  positive(gamma, "gamma");
  positive(delta1, "delta1");
  positive(delta2, "delta2");
  if (topics < 1) throw std::invalid_argument("topics must be >= 1");
  if (sentiments < 2) throw std::invalid_argument("sentiments must be >= 2");
  if (labels < 1) throw std::invalid_argument("labels must be >= 1");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw std::invalid_argument("burn_in must be in [0, iterations)");
  }
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
}

CountState::CountState(int labels_, int topics_, int sentiments_, int32_t vocab_)
    : labels(labels_), topics(topics_), sentiments(sentiments_), vocab(vocab_) {
  label_topic_docs.assign(static_cast<size_t>(labels) * topics, 0);
  docs_per_label.assign(labels, 0);
  topic_word.assign(static_cast<size_t>(topics) * vocab, 0);
  topic_tokens.assign(topics, 0);
  sent_topic_word.assign(static_cast<size_t>(sentiments) * topics * vocab, 0);
  sent_topic_tokens.assign(static_cast<size_t>(sentiments) * topics, 0);
  sent_word.assign(static_cast<size_t>(sentiments) * vocab, 0);
  sent_tokens.assign(sentiments, 0);
  label_topic_sent.assign(static_cast<size_t>(labels) * topics * sentiments, 0);
  label_topic_sent_tokens.assign(static_cast<size_t>(labels) * topics, 0);
  label_sent.assign(static_cast<size_t>(labels) * sentiments, 0);
  label_sent_tokens.assign(labels, 0);
}

void CountState::add_document(const Document& doc, int32_t z,
                              const std::vector<uint8_t>& states, int direction) {
  assert(doc.label && *doc.label >= 0 && *doc.label < labels);
  assert(states.size() == doc.tokens.size());
  const int l = *doc.label;
  const int32_t d = direction;
  label_topic_docs[lz(l, z)] += d;
  docs_per_label[l] += d;
  for (size_t j = 0; j < doc.tokens.size(); ++j) {
    const int32_t w = doc.tokens[j];
    if (w < 0) continue;  // OOV skip marker
    if (states[j] == kTopicWord) {
      topic_word[zw(z, w)] += d;
      topic_tokens[z] += d;
    } else {
      const int s = state_sentiment(states[j]);
      sent_topic_word[szw(s, z, w)] += d;
      sent_topic_tokens[sz(s, z)] += d;
      sent_word[sw(s, w)] += d;
      sent_tokens[s] += d;
      label_topic_sent[lzs(l, z, s)] += d;
      label_topic_sent_tokens[lz(l, z)] += d;
      label_sent[ls(l, s)] += d;
      label_sent_tokens[l] += d;
    }
  }
}

int64_t CountState::total_tokens() const {
  int64_t n = 0;
  for (int32_t c : topic_tokens) n += c;
  for (int32_t c : sent_topic_tokens) n += c;
  return n;
}

CountState recompute_counts(const Corpus& corpus, const LatentState& state,
                            const Hyperparams& hp) {
  CountState counts(hp.labels, hp.topics, hp.sentiments, corpus.vocab.size());
  for (size_t d = 0; d < corpus.docs.size(); ++d) {
    counts.add_document(corpus.docs[d], state.doc_topic[d], state.token_state[d], +1);
  }
  return counts;
}

std::pair<LatentState, CountState> init_state(const Corpus& corpus,
                                              const EtaTable& eta,
                                              const Hyperparams& hp, Rng& rng) {
  LatentState state;
  state.doc_topic.resize(corpus.docs.size());
  state.token_state.resize(corpus.docs.size());
  CountState counts(hp.labels, hp.topics, hp.sentiments, corpus.vocab.size());
  for (size_t d = 0; d < corpus.docs.size(); ++d) {
    const Document& doc = corpus.docs[d];
    state.doc_topic[d] = rng.uniform_int(hp.topics);
    auto& states = state.token_state[d];
    states.resize(doc.tokens.size(), kTopicWord);
    for (size_t j = 0; j < doc.tokens.size(); ++j) {
      const int32_t w = doc.tokens[j];
      if (w < 0) continue;
      if (rng.bernoulli(eta[w])) {
        states[j] = sentiment_state(rng.uniform_int(hp.sentiments));
      }
    }
    counts.add_document(doc, state.doc_topic[d], states, +1);
  }
  return {std::move(state), std::move(counts)};
}

ModelArtifact point_estimates(const CountState& counts, const Hyperparams& hp,
                              const BaseMeasures& base, const EtaTable& eta,
                              const Vocabulary& vocab) {
  const int L = hp.labels, Z = hp.topics, S = hp.sentiments;
  const int32_t V = vocab.size();
  ModelArtifact m;
  m.hyper = hp;
  m.vocab = vocab;
  m.eta = eta;
  m.base = base;

  m.theta.resize(static_cast<size_t>(L) * Z);
  for (int l = 0; l < L; ++l) {
    const double denom = counts.docs_per_label[l] + Z * hp.alpha;
    for (int z = 0; z < Z; ++z) {
      m.theta[counts.lz(l, z)] = (counts.label_topic_docs[counts.lz(l, z)] + hp.alpha) / denom;
    }
  }

  m.phi.resize(static_cast<size_t>(Z) * V);
  for (int z = 0; z < Z; ++z) {
    const double denom = counts.topic_tokens[z] + V * hp.gamma;
    for (int32_t w = 0; w < V; ++w) {
      m.phi[counts.zw(z, w)] = (counts.topic_word[counts.zw(z, w)] + hp.gamma) / denom;
    }
  }

  m.chi_parent.resize(static_cast<size_t>(S) * V);
  for (int s = 0; s < S; ++s) {
    const double denom = counts.sent_tokens[s] + hp.delta1;
    for (int32_t w = 0; w < V; ++w) {
      m.chi_parent[counts.sw(s, w)] =
          (counts.sent_word[counts.sw(s, w)] + hp.delta1 * base.at(s, w)) / denom;
    }
  }

  m.chi.resize(static_cast<size_t>(S) * Z * V);
  for (int s = 0; s < S; ++s) {
    for (int z = 0; z < Z; ++z) {
      const double denom = counts.sent_topic_tokens[counts.sz(s, z)] + hp.delta2;
      for (int32_t w = 0; w < V; ++w) {
        m.chi[counts.szw(s, z, w)] =
            (counts.sent_topic_word[counts.szw(s, z, w)] +
             hp.delta2 * m.chi_parent[counts.sw(s, w)]) /
            denom;
      }
    }
  }

  m.psi_parent.resize(static_cast<size_t>(L) * S);
  for (int l = 0; l < L; ++l) {
    const double denom = counts.label_sent_tokens[l] + hp.beta1;
    for (int s = 0; s < S; ++s) {
      m.psi_parent[counts.ls(l, s)] =
          (counts.label_sent[counts.ls(l, s)] + hp.beta1 / S) / denom;
    }
  }

  m.psi.resize(static_cast<size_t>(L) * Z * S);
  for (int l = 0; l < L; ++l) {
    for (int z = 0; z < Z; ++z) {
      const double denom = counts.label_topic_sent_tokens[counts.lz(l, z)] + hp.beta2;
      for (int s = 0; s < S; ++s) {
        m.psi[counts.lzs(l, z, s)] =
            (counts.label_topic_sent[counts.lzs(l, z, s)] +
             hp.beta2 * m.psi_parent[counts.ls(l, s)]) /
            denom;
      }
    }
  }

  m.label_prior.resize(L);
  int64_t total_docs = 0;
  for (int l = 0; l < L; ++l) total_docs += counts.docs_per_label[l];
  for (int l = 0; l < L; ++l) {
    m.label_prior[l] = total_docs > 0
                           ? counts.docs_per_label[l] / static_cast<double>(total_docs)
                           : 1.0 / L;
  }
  return m;
}

namespace {

ordered_json dump_doubles(const std::vector<double>& v) {
  auto arr = ordered_json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

std::vector<double> load_doubles(const ordered_json& arr, size_t expect,
                                 const std::string& name) {
  if (!arr.is_array() || arr.size() != expect) {
    throw CorruptFileError("array " + name + " has wrong size");
  }
  std::vector<double> v;
  v.reserve(arr.size());
  for (const auto& x : arr) v.push_back(x.get<double>());
  return v;
}

}  // namespace

void save_model(const ModelArtifact& m, const std::string& path) {
  ordered_json payload;
  payload["dims"] = {{"labels", m.hyper.labels},
                     {"topics", m.hyper.topics},
                     {"sentiments", m.hyper.sentiments},
                     {"vocab", m.vocab.size()}};
  ordered_json hyper;
  hyper["topics"] = m.hyper.topics;
  hyper["sentiments"] = m.hyper.sentiments;
  hyper["labels"] = m.hyper.labels;
  hyper["alpha"] = m.hyper.alpha;
  hyper["beta1"] = m.hyper.beta1;
  hyper["beta2"] = m.hyper.beta2;
  hyper["gamma"] = m.hyper.gamma;
  hyper["delta1"] = m.hyper.delta1;
  hyper["delta2"] = m.hyper.delta2;
  hyper["iterations"] = m.hyper.iterations;
  hyper["burn_in"] = m.hyper.burn_in;
  hyper["thin"] = m.hyper.thin;
  hyper["seed"] = m.hyper.seed;
  payload["hyper"] = std::move(hyper);
  payload["config"] = ordered_json::object();
  for (const auto& [k, v] : m.config_echo) payload["config"][k] = v;
  payload["vocabulary"] = m.vocab.words();
  auto freqs = ordered_json::array();
  for (int32_t w = 0; w < m.vocab.size(); ++w) freqs.push_back(m.vocab.freq(w));
  payload["frequencies"] = std::move(freqs);
  payload["eta"] = dump_doubles(m.eta);
  payload["base"] = dump_doubles(m.base.weights);
  payload["label_prior"] = dump_doubles(m.label_prior);
  payload["theta"] = dump_doubles(m.theta);
  payload["phi"] = dump_doubles(m.phi);
  payload["chi_parent"] = dump_doubles(m.chi_parent);
  payload["chi"] = dump_doubles(m.chi);
  payload["psi_parent"] = dump_doubles(m.psi_parent);
  payload["psi"] = dump_doubles(m.psi);

  ordered_json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload.dump())));
  j["checksum"] = checksum;
  j["payload"] = std::move(payload);
  atomic_write_file(path, j.dump() + "\n");
}

ModelArtifact load_model(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(path + ": not a valid model file: " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kModelFormatName) {
    throw CorruptFileError(path + ": not a model file");
  }
  if (j.value("version", -1) != kModelFormatVersion) {
    throw VersionMismatchError(path + ": model format version " + j["version"].dump() +
                               ", expected " + std::to_string(kModelFormatVersion));
  }
  if (!j.contains("payload") || !j.contains("checksum")) {
    throw CorruptFileError(path + ": missing payload or checksum");
  }
  char expect[32];
  std::snprintf(expect, sizeof(expect), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j["payload"].dump())));
  if (j["checksum"].get<std::string>() != expect) {
    throw CorruptFileError(path + ": checksum mismatch");
  }

  try {
    const auto& p = j["payload"];
    ModelArtifact m;
    const auto& h = p.at("hyper");
    m.hyper.topics = h.at("topics").get<int>();
    m.hyper.sentiments = h.at("sentiments").get<int>();
    m.hyper.labels = h.at("labels").get<int>();
    m.hyper.alpha = h.at("alpha").get<double>();
    m.hyper.beta1 = h.at("beta1").get<double>();
    m.hyper.beta2 = h.at("beta2").get<double>();
    m.hyper.gamma = h.at("gamma").get<double>();
    m.hyper.delta1 = h.at("delta1").get<double>();
    m.hyper.delta2 = h.at("delta2").get<double>();
    m.hyper.iterations = h.at("iterations").get<int>();
    m.hyper.burn_in = h.at("burn_in").get<int>();
    m.hyper.thin = h.at("thin").get<int>();
    m.hyper.seed = h.at("seed").get<uint64_t>();
    for (const auto& [k, v] : p.at("config").items()) {
      m.config_echo[k] = v.get<std::string>();
    }
    const auto& words = p.at("vocabulary");
    const auto& freqs = p.at("frequencies");
    for (size_t w = 0; w < words.size(); ++w) {
      m.vocab.add(words[w].get<std::string>(), freqs.at(w).get<int64_t>());
    }
    const size_t L = m.hyper.labels, Z = m.hyper.topics, S = m.hyper.sentiments;
    const size_t V = m.vocab.size();
    m.eta = load_doubles(p.at("eta"), V, "eta");
    m.base.sentiments = m.hyper.sentiments;
    m.base.vocab_size = m.vocab.size();
    m.base.weights = load_doubles(p.at("base"), S * V, "base");
    m.label_prior = load_doubles(p.at("label_prior"), L, "label_prior");
    m.theta = load_doubles(p.at("theta"), L * Z, "theta");
    m.phi = load_doubles(p.at("phi"), Z * V, "phi");
    m.chi_parent = load_doubles(p.at("chi_parent"), S * V, "chi_parent");
    m.chi = load_doubles(p.at("chi"), S * Z * V, "chi");
    m.psi_parent = load_doubles(p.at("psi_parent"), L * S, "psi_parent");
    m.psi = load_doubles(p.at("psi"), L * Z * S, "psi");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(path + ": malformed model payload: " + e.what());
  }
}

}  // namespace stm
