#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "stm/errors.hpp"
#include "stm/sampler.hpp"
#include "synthetic.hpp"

using namespace stm;

namespace {

BaseMeasures make_base(int32_t v, std::vector<double> weights) {
  BaseMeasures b;
  b.sentiments = 2;
  b.vocab_size = v;
  b.weights = std::move(weights);
  return b;
}

BaseMeasures uniform_base(int32_t v) {
  return make_base(v, std::vector<double>(static_cast<size_t>(2) * v, 1.0 / v));
}

Corpus instance_corpus(const test::TinyInstance& in) {
  Corpus c;
  for (int32_t w = 0; w < in.vocab; ++w) c.vocab.add("w" + std::to_string(w), 1);
  int i = 0;
  for (const auto& [label, words] : in.docs) {
    c.docs.push_back({"d" + std::to_string(i++), words, label});
  }
  c.recount_labels();
  return c;
}

test::TinyInstance exactness_instance() {
  test::TinyInstance in;
  in.eta = {0.0, 0.3, 0.7, 1.0};
  in.chi_parent = {0.4, 0.3, 0.2, 0.1, 0.1, 0.2, 0.3, 0.4};
  in.psi_parent = {0.5, 0.5};
  in.docs = {{0, {0, 1, 2}}, {1, {1, 3}}, {0, {2, 3, 0}}};
  return in;
}

}  // namespace

TEST_CASE("token_block_probs degenerate switch cases") {
  const int32_t V = 2;
  Hyperparams hp;
  hp.topics = 1;
  hp.labels = 1;
  hp.gamma = 0.5;
  hp.delta2 = 1.0;
  hp.beta2 = 2.0;
  const EtaTable eta_off{0.0, 0.0};
  const BaseMeasures base = uniform_base(V);
  CountState counts(1, 1, 2, V);
  GibbsContext ctx{hp, &eta_off, &base, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5}};

  const auto off = token_block_probs(0, 0, 0, counts, ctx);
  CHECK(off[kTopicWord] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(off[kSentPos] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(off[kSentNeg] == doctest::Approx(0.0).epsilon(1e-12));

  const EtaTable eta_on{1.0, 1.0};
  ctx.eta = &eta_on;
  const auto on = token_block_probs(0, 0, 0, counts, ctx);
  CHECK(on[kTopicWord] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(on[kSentPos] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(on[kSentNeg] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("token_block_probs hand-computed fixture") {
  // V=2, Z=1: topic counts [2,1]; pos counts [1,0]/1; neg counts [0,2]/2;
  // sentiment draws [1,2]/3; gamma=.5, delta2=1, beta2=2, eta(w0)=0.4,
  // parents chi=(.6,.4)/(.3,.7), psi=(.5,.5)
  const int32_t V = 2;
  Hyperparams hp;
  hp.topics = 1;
  hp.labels = 1;
  hp.gamma = 0.5;
  hp.delta2 = 1.0;
  hp.beta2 = 2.0;
  const EtaTable eta{0.4, 0.9};
  const BaseMeasures base = uniform_base(V);
  CountState counts(1, 1, 2, V);
  counts.topic_word = {2, 1};
  counts.topic_tokens = {3};
  counts.sent_topic_word = {1, 0, 0, 2};
  counts.sent_topic_tokens = {1, 2};
  counts.label_topic_sent = {1, 2};
  counts.label_topic_sent_tokens = {3};
  GibbsContext ctx{hp, &eta, &base, {0.6, 0.4, 0.3, 0.7}, {0.5, 0.5}};

  const auto p = token_block_probs(0, 0, 0, counts, ctx);
  CHECK(p[kTopicWord] == doctest::Approx(0.7115749525616698).epsilon(1e-12));
  CHECK(p[kSentPos] == doctest::Approx(0.2428842504743833).epsilon(1e-12));
  CHECK(p[kSentNeg] == doctest::Approx(0.04554079696394687).epsilon(1e-12));
}

TEST_CASE("doc_topic_probs single topic and constant likelihood") {
  const int32_t V = 3;
  Hyperparams hp;
  hp.topics = 1;
  hp.labels = 1;
  hp.delta1 = 1.0;
  hp.delta2 = 1.0;
  const EtaTable eta(V, 0.0);
  const BaseMeasures base = uniform_base(V);
  CountState counts(1, 1, 2, V);
  GibbsContext ctx{hp, &eta, &base, {}, {}};
  ctx.refresh_parents(counts);
  const Document doc{"d", {0, 1, 2}, 0};
  const auto single = doc_topic_probs(doc, 0, counts, ctx);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == doctest::Approx(1.0).epsilon(1e-12));

  // eta = 0 everywhere and identical phi counts across topics: the
  // likelihood term cancels and P(z) follows theta alone
  Hyperparams hp3 = hp;
  hp3.topics = 3;
  CountState c3(1, 3, 2, V);
  c3.label_topic_docs = {3, 1, 0};
  c3.docs_per_label = {4};
  GibbsContext ctx3{hp3, &eta, &base, {}, {}};
  ctx3.refresh_parents(c3);
  const auto p = doc_topic_probs(doc, 0, c3, ctx3);
  const double denom = 4 + 3 * hp3.alpha;
  CHECK(p[0] == doctest::Approx((3 + hp3.alpha) / denom).epsilon(1e-9));
  CHECK(p[1] == doctest::Approx((1 + hp3.alpha) / denom).epsilon(1e-9));
  CHECK(p[2] == doctest::Approx((0 + hp3.alpha) / denom).epsilon(1e-9));
}

TEST_CASE("doc_topic_probs hand-computed two-topic fixture") {
  const int32_t V = 2;
  Hyperparams hp;
  hp.topics = 2;
  hp.labels = 1;
  hp.alpha = 0.5;
  hp.gamma = 1.0;
  hp.delta2 = 2.0;
  hp.beta2 = 1.0;
  const EtaTable eta{0.4, 0.8};
  const BaseMeasures base = uniform_base(V);
  CountState counts(1, 2, 2, V);
  counts.label_topic_docs = {2, 1};
  counts.docs_per_label = {3};
  counts.topic_word = {3, 1, 0, 2};
  counts.topic_tokens = {4, 2};
  counts.sent_topic_word = {1, 0, 0, 0, 0, 1, 2, 0};  // [s][z][w]
  counts.sent_topic_tokens = {1, 0, 1, 2};
  counts.label_topic_sent = {1, 1, 0, 2};  // [l][z][s]
  counts.label_topic_sent_tokens = {2, 2};
  GibbsContext ctx{hp, &eta, &base, {0.6, 0.4, 0.3, 0.7}, {0.5, 0.5}};

  const Document doc{"d", {0, 1}, 0};
  const auto p = doc_topic_probs(doc, 0, counts, ctx);
  CHECK(p[0] == doctest::Approx(0.7309216212272569).epsilon(1e-10));
  CHECK(p[1] == doctest::Approx(0.2690783787727431).epsilon(1e-10));
}

TEST_CASE("add/remove document is an exact inverse") {
  Rng rng(5);
  test::TrueModel model = test::make_mixture_model(rng);
  const auto synth = test::generate_corpus(model, 30, 8.0, 4, rng);
  Hyperparams hp;
  hp.topics = model.topics;
  hp.labels = model.labels;
  Rng init_rng(1);
  auto [state, counts] = init_state(synth.corpus, model.trainer_eta, hp, init_rng);
  const CountState before = counts;
  for (size_t d = 0; d < synth.corpus.docs.size(); ++d) {
    counts.add_document(synth.corpus.docs[d], state.doc_topic[d],
                        state.token_state[d], -1);
    counts.add_document(synth.corpus.docs[d], state.doc_topic[d],
                        state.token_state[d], +1);
  }
  CHECK(counts == before);
}

TEST_CASE("gibbs_sweep maintains exact count consistency") {
  Rng rng(9);
  test::TrueModel model = test::make_mixture_model(rng);
  const auto synth = test::generate_corpus(model, 40, 9.0, 4, rng);
  Hyperparams hp;
  hp.topics = model.topics;
  hp.labels = model.labels;
  hp.gamma = 0.05;
  hp.delta1 = 0.1 * model.vocab;
  hp.delta2 = 0.1 * model.vocab;
  Rng chain_rng(2);
  auto [state, counts] = init_state(synth.corpus, model.trainer_eta, hp, chain_rng);
  GibbsContext ctx{hp, &model.trainer_eta, &model.trainer_base, {}, {}};
  for (int sweep = 0; sweep < 15; ++sweep) {
    gibbs_sweep(synth.corpus, state, counts, ctx, chain_rng);
    CHECK(recompute_counts(synth.corpus, state, hp) == counts);
    CHECK(counts.total_tokens() == synth.corpus.total_tokens());
  }
}

TEST_CASE("gibbs_sweep is deterministic under a fixed seed") {
  Rng rng(13);
  test::TrueModel model = test::make_mixture_model(rng);
  const auto synth = test::generate_corpus(model, 25, 8.0, 4, rng);
  Hyperparams hp;
  hp.topics = model.topics;
  hp.labels = model.labels;

  auto run = [&](uint64_t seed) {
    Rng r(seed);
    auto [state, counts] = init_state(synth.corpus, model.trainer_eta, hp, r);
    GibbsContext ctx{hp, &model.trainer_eta, &model.trainer_base, {}, {}};
    for (int sweep = 0; sweep < 5; ++sweep) {
      gibbs_sweep(synth.corpus, state, counts, ctx, r);
    }
    return std::pair{state.doc_topic, state.token_state};
  };
  const auto a = run(77);
  const auto b = run(77);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  const auto c = run(78);
  CHECK(a.first != c.first);  // different seed actually changes the path
}

TEST_CASE("sampler matches exact enumeration on the tiny instance") {
  const test::TinyInstance in = exactness_instance();
  const test::EnumerationResult exact = test::enumerate_posterior(in);

  const Corpus corpus = instance_corpus(in);
  const Hyperparams hp = in.hyperparams();
  const BaseMeasures base = make_base(in.vocab, in.chi_parent);
  Rng rng(20240501);
  auto [state, counts] = init_state(corpus, in.eta, hp, rng);
  GibbsContext ctx{hp, &in.eta, &base, {}, {}};

  const int burn = 5000, keep = 50000;
  const size_t D = corpus.docs.size();
  std::vector<std::vector<int64_t>> z_hist(D, std::vector<int64_t>(in.topics, 0));
  std::vector<std::unordered_map<uint64_t, int64_t>> blob_hist(D);
  for (int sweep = 0; sweep < burn + keep; ++sweep) {
    gibbs_sweep(corpus, state, counts, ctx, rng);
    if (sweep < burn) continue;
    for (size_t d = 0; d < D; ++d) {
      ++z_hist[d][state.doc_topic[d]];
      ++blob_hist[d][test::encode_blob(state.doc_topic[d], state.token_state[d])];
    }
  }

  for (size_t d = 0; d < D; ++d) {
    double tv_z = 0.0;
    for (int z = 0; z < in.topics; ++z) {
      const double emp = static_cast<double>(z_hist[d][z]) / keep;
      tv_z += std::abs(emp - exact.doc_topic_marginal[d * in.topics + z]);
    }
    tv_z *= 0.5;
    INFO("doc " << d << " z-marginal TV " << tv_z);
    CHECK(tv_z <= 0.02);

    // stronger joint check over the whole (z, states) blob: this is the one
    // that fails if the blocked proposal is not corrected
    double tv_blob = 0.0;
    auto keys = exact.blob_marginal[d];
    for (const auto& [key, count] : blob_hist[d]) {
      if (!keys.count(key)) keys[key] = 0.0;
    }
    for (const auto& [key, p_exact] : keys) {
      const auto it = blob_hist[d].find(key);
      const double emp = it == blob_hist[d].end()
                             ? 0.0
                             : static_cast<double>(it->second) / keep;
      tv_blob += std::abs(emp - p_exact);
    }
    tv_blob *= 0.5;
    INFO("doc " << d << " blob TV " << tv_blob);
    CHECK(tv_blob <= 0.02);
  }

  CHECK(recompute_counts(corpus, state, hp) == counts);
}

TEST_CASE("train with one post-burn-in sweep equals the single snapshot") {
  Rng rng(41);
  test::TrueModel model = test::make_mixture_model(rng);
  const auto synth = test::generate_corpus(model, 30, 8.0, 4, rng);
  Hyperparams hp;
  hp.topics = model.topics;
  hp.labels = model.labels;
  hp.iterations = 6;
  hp.burn_in = 5;
  hp.thin = 1;
  hp.seed = 3;
  const TrainResult result =
      train(synth.corpus, model.trainer_eta, model.trainer_base, hp);

  const Hyperparams resolved = hp.resolved(synth.corpus.vocab.size());
  const CountState final_counts =
      recompute_counts(synth.corpus, result.final_state, resolved);
  const ModelArtifact snapshot = point_estimates(
      final_counts, resolved, model.trainer_base, model.trainer_eta,
      synth.corpus.vocab);
  REQUIRE(result.artifact.phi.size() == snapshot.phi.size());
  for (size_t i = 0; i < snapshot.phi.size(); ++i) {
    CHECK(result.artifact.phi[i] == doctest::Approx(snapshot.phi[i]).epsilon(1e-12));
  }
  for (size_t i = 0; i < snapshot.theta.size(); ++i) {
    CHECK(result.artifact.theta[i] == doctest::Approx(snapshot.theta[i]).epsilon(1e-12));
  }
  for (size_t i = 0; i < snapshot.chi.size(); ++i) {
    CHECK(result.artifact.chi[i] == doctest::Approx(snapshot.chi[i]).epsilon(1e-12));
  }
}

TEST_CASE("averaged artifact passes distribution invariants") {
  Rng rng(43);
  test::TrueModel model = test::make_mixture_model(rng);
  const auto synth = test::generate_corpus(model, 60, 9.0, 4, rng);
  Hyperparams hp;
  hp.topics = model.topics;
  hp.labels = model.labels;
  hp.iterations = 30;
  hp.burn_in = 10;
  hp.thin = 3;
  hp.seed = 4;
  const TrainResult result =
      train(synth.corpus, model.trainer_eta, model.trainer_base, hp);
  auto check_rows = [](const std::vector<double>& v, size_t row_len) {
    for (size_t r = 0; r < v.size(); r += row_len) {
      double total = 0.0;
      for (size_t i = 0; i < row_len; ++i) {
        CHECK(v[r + i] >= 0.0);
        total += v[r + i];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  };
  check_rows(result.artifact.theta, hp.topics);
  check_rows(result.artifact.phi, synth.corpus.vocab.size());
  check_rows(result.artifact.chi_parent, synth.corpus.vocab.size());
  check_rows(result.artifact.chi, synth.corpus.vocab.size());
  check_rows(result.artifact.psi_parent, 2);
  check_rows(result.artifact.psi, 2);
  CHECK(result.log_joint_trace.size() == static_cast<size_t>(hp.iterations));
  CHECK(result.acceptance_rate > 0.0);
  CHECK(result.acceptance_rate <= 1.0);
}

TEST_CASE("train rejects an empty corpus") {
  Corpus empty;
  Hyperparams hp;
  CHECK_THROWS_AS(train(empty, {}, {}, hp), EmptyCorpusError);
}

TEST_CASE("log joint improves from the burn-in phase to the kept phase") {
  Rng rng(47);
  test::TrueModel model = test::make_mixture_model(rng);
  const auto synth = test::generate_corpus(model, 120, 10.0, 5, rng);
  Hyperparams hp;
  hp.topics = model.topics;
  hp.labels = model.labels;
  hp.gamma = 0.05;
  hp.iterations = 60;
  hp.burn_in = 30;
  hp.thin = 5;
  hp.seed = 5;
  const TrainResult result =
      train(synth.corpus, model.trainer_eta, model.trainer_base, hp);
  const auto& tr = result.log_joint_trace;
  const double early = std::accumulate(tr.begin(), tr.begin() + hp.burn_in, 0.0) /
                       hp.burn_in;
  const double late = std::accumulate(tr.begin() + hp.burn_in, tr.end(), 0.0) /
                      (hp.iterations - hp.burn_in);
  CHECK(early < late);
}
