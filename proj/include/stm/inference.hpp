#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stm/model.hpp"

namespace stm {

struct Prediction {
  std::string doc_id;
  std::optional<int> label;    // nullopt when every token was OOV
  std::vector<double> scores;  // per label: mean log-likelihood or vote share
};

// log p(l) + log theta_l(z) + per-token switch/word terms under the
// artifact's point estimates. OOV tokens (id -1) are skipped; throws
// AllTokensOovError when nothing remains.
double complete_data_log_likelihood(std::span<const int32_t> tokens, int label,
                                    int32_t z, std::span<const uint8_t> states,
                                    const ModelArtifact& artifact,
                                    bool include_label_prior = true);

struct LoglikParams {
  int samples = 60;
  int burn_in = 20;
  bool include_label_prior = true;
};

// For each candidate label, runs a frozen-artifact Gibbs chain over
// (z, switch, sentiment) with the label fixed and scores the mean
// complete-data log-likelihood over post-burn-in samples. Ties break in
// label order.
Prediction classify_loglik(const Document& doc, const ModelArtifact& artifact,
                           const LoglikParams& params, Rng& rng);

enum class SamplingMode { kLast, kModeVote };

struct SamplingParams {
  int sweeps = 60;
  int burn_in = 20;  // ignored for kLast
  SamplingMode mode = SamplingMode::kLast;
};

// Gibbs chain with the label latent alongside (z, switch, sentiment);
// returns the last sampled label or the post-burn-in majority. Scores are
// the label vote shares.
Prediction classify_sampling(const Document& doc, const ModelArtifact& artifact,
                             const SamplingParams& params, Rng& rng);

enum class Method { kLoglik, kSampling };

struct PredictParams {
  Method method = Method::kLoglik;
  LoglikParams loglik;
  SamplingParams sampling;
  uint64_t seed = 0;
  int jobs = 1;
};

struct PredictResult {
  std::vector<Prediction> predictions;
  int64_t null_predictions = 0;
};

// Applies the chosen classifier to every document. Each document's chain
// owns a private rng derived from (seed, doc id), so the output is
// independent of job count.
PredictResult predict_corpus(const std::vector<Document>& docs,
                             const ModelArtifact& artifact,
                             const PredictParams& params);

// Encodes raw token strings against the artifact's vocabulary; OOV tokens
// become the skip marker -1.
std::vector<int32_t> encode_tokens(const std::vector<std::string>& tokens,
                                   const Vocabulary& vocab);

// One exact posterior draw of (z, token states) for a labeled document under
// the frozen artifact. States align with doc.tokens; OOV positions stay
// kTopicWord and are skipped by consumers.
std::pair<int32_t, std::vector<uint8_t>> sample_assignments(
    const Document& doc, int label, const ModelArtifact& artifact, Rng& rng);

}  // namespace stm
