#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stm/model.hpp"

namespace stm {

// Per-sweep context: hyperparameters plus the parent estimates, which are
// refreshed once at sweep start and held fixed while documents move.
struct GibbsContext {
  Hyperparams hp;
  const EtaTable* eta = nullptr;
  const BaseMeasures* base = nullptr;
  std::vector<double> chi_parent;  // S x V
  std::vector<double> psi_parent;  // L x S

  void refresh_parents(const CountState& counts);
  double chi_parent_at(int s, int32_t w) const {
    return chi_parent[static_cast<size_t>(s) * base->vocab_size + w];
  }
  double psi_parent_at(int l, int s) const {
    return psi_parent[static_cast<size_t>(l) * hp.sentiments + s];
  }
};

// Normalized conditional for one token given the document's topic:
// [topic word, sentiment word pos, sentiment word neg]. Counts must exclude
// the token's own assignment.
std::array<double, kNumTokenStates> token_block_probs(int32_t w, int label, int z,
                                                      const CountState& counts,
                                                      const GibbsContext& ctx);

// Normalized distribution over the document's topic with the per-token
// (switch, sentiment) pairs marginalized out. Counts must exclude the whole
// document. Log-space accumulation with max subtraction.
std::vector<double> doc_topic_probs(const Document& doc, int label,
                                    const CountState& counts,
                                    const GibbsContext& ctx);

struct SweepStats {
  int64_t proposed = 0;
  int64_t accepted = 0;
};

// One pass over the corpus. Each document is removed from the counts, a
// blocked (z, states) proposal is drawn from doc_topic_probs and
// token_block_probs, and the proposal is accepted against the exact
// collapsed conditional given the sweep's frozen parents; the document is
// then re-added. Deterministic given the rng state.
SweepStats gibbs_sweep(const Corpus& corpus, LatentState& state,
                       CountState& counts, GibbsContext& ctx, Rng& rng);

// Complete-data log joint of the corpus under the point estimates derived
// from the current counts; the per-sweep training trace.
double complete_data_log_joint(const Corpus& corpus, const LatentState& state,
                               const ModelArtifact& estimates);

struct TrainOptions {
  // sweep number (1-based), log joint, seconds spent on the sweep
  std::function<void(int, double, double)> log_sink;
  bool progress = false;  // one line per sweep to stderr
};

struct TrainResult {
  ModelArtifact artifact;      // mean of post-burn-in snapshots, renormalized
  LatentState final_state;     // assignments after the last sweep
  std::vector<double> log_joint_trace;  // one entry per sweep
  double acceptance_rate = 0.0;
};

// Runs hp.iterations sweeps; every thin-th sweep after burn_in contributes a
// point_estimates snapshot. Throws EmptyCorpusError on an empty corpus.
TrainResult train(const Corpus& corpus, const EtaTable& eta,
                  const BaseMeasures& base, const Hyperparams& hp,
                  const TrainOptions& options = {});

}  // namespace stm
