// Test-only oracles, independent of the sampler implementation: closed-form
// Dirichlet-multinomial scoring via lgamma and exhaustive enumeration of
// small latent configuration spaces.
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "stm/inference.hpp"
#include "stm/model.hpp"

namespace stm::test {

// log DirMult(counts | concentrations), closed form.
double log_dirmult(const std::vector<int>& counts, const std::vector<double>& conc);

// A small instance with the hierarchical parents pinned (the regime obtained
// with very large beta1 / delta1), so the collapsed joint is exact and finite
// enumeration is possible.
struct TinyInstance {
  int topics = 2;
  int sentiments = 2;
  int labels = 2;
  int32_t vocab = 4;
  double alpha = 1.0;
  double gamma = 0.5;
  double delta2 = 2.0;
  double beta2 = 1.0;
  std::vector<double> eta;         // per word
  std::vector<double> chi_parent;  // S x V, rows sum to 1
  std::vector<double> psi_parent;  // per sentiment (same for every label)
  std::vector<std::pair<int, std::vector<int32_t>>> docs;  // (label, word ids)

  Hyperparams hyperparams(double pin = 1e9) const;  // beta1 = delta1 = pin
};

struct EnumerationResult {
  std::vector<double> doc_topic_marginal;  // D x Z row-major
  // per document: encoded (z, states) -> marginal probability, where the key
  // is z * 3^n + sum_j states[j] * 3^j
  std::vector<std::unordered_map<uint64_t, double>> blob_marginal;
};

uint64_t encode_blob(int32_t z, const std::vector<uint8_t>& states);

// Scores every (z per doc, state per token) configuration with the collapsed
// joint and accumulates exact marginals.
EnumerationResult enumerate_posterior(const TinyInstance& instance);

// Exact per-label expected complete-data log-likelihood for one document
// under a frozen artifact, by enumeration over (z, states).
double exact_mean_loglik(const Document& doc, int label,
                         const ModelArtifact& artifact, bool include_label_prior);

// Exact label posterior p(l | w) under a frozen artifact (all latent
// variables marginalized); reference for the sampling classifier.
std::vector<double> exact_label_posterior(const Document& doc,
                                          const ModelArtifact& artifact);

// Pearson chi-square statistic against uniform expected counts.
double chi_square_uniform(const std::vector<int64_t>& observed);

}  // namespace stm::test
