// stm: sarcasm topic model pipeline driver.
//
// Subcommands: ingest, train, predict, evaluate, report-topics, report-plz,
// report-hist. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stm/corpus.hpp"
#include "stm/errors.hpp"
#include "stm/evaluation.hpp"
#include "stm/inference.hpp"
#include "stm/lexicon.hpp"
#include "stm/model.hpp"
#include "stm/sampler.hpp"
#include "stm/text_io.hpp"

namespace {

using stm::format_double;

std::string echo_header(const std::string& kind,
                        const std::map<std::string, std::string>& config) {
  std::ostringstream out;
  out << "# " << kind << " v1\n#";
  for (const auto& [k, v] : config) out << " " << k << "=" << v;
  out << "\n";
  return out.str();
}

std::vector<stm::RawRecord> load_records(const std::string& path,
                                         const std::string& format) {
  if (format == "tsv") return stm::load_tsv_records(path);
  return stm::load_jsonl_records(path);
}

char state_char(uint8_t state, int32_t word) {
  if (word < 0) return '.';
  switch (state) {
    case stm::kSentPos: return 'p';
    case stm::kSentNeg: return 'n';
    default: return 't';
  }
}

// ---------------------------------------------------------------- ingest

struct IngestOptions {
  std::string input, output;
  std::string format = "jsonl";
  std::string function_words_path, rules_path;
  stm::CorpusOptions corpus;
  std::string preset;
};

int run_ingest(const IngestOptions& opt) {
  const auto records = load_records(opt.input, opt.format);
  const auto rules = opt.rules_path.empty() ? stm::default_hashtag_rules()
                                            : stm::load_hashtag_rules(opt.rules_path);
  const auto function_words = opt.function_words_path.empty()
                                  ? stm::FunctionWords{}
                                  : stm::load_function_words(opt.function_words_path);
  const stm::Corpus corpus = stm::build_corpus(records, rules, function_words, opt.corpus);

  std::map<std::string, std::string> echo{
      {"input", opt.input},
      {"format", opt.format},
      {"min_count", std::to_string(opt.corpus.min_count)},
      {"min_doc_len", std::to_string(opt.corpus.min_doc_len)},
      {"function_words", opt.function_words_path},
      {"hashtag_rules", opt.rules_path.empty() ? "<builtin>" : opt.rules_path},
  };
  stm::save_corpus(corpus, opt.output, echo);
  std::cerr << "ingest: " << corpus.docs.size() << " documents, vocabulary "
            << corpus.vocab.size() << " (records in: " << records.size() << ")\n";
  return 0;
}

// ----------------------------------------------------------------- train

struct TrainCliOptions {
  std::string corpus_path, output;
  std::string lexicon_path, pos_words_path, neg_words_path;
  std::string train_log_path, assignments_path;
  double default_eta = 0.1;
  double boost = 4.0;
  stm::Hyperparams hyper;
  bool progress = false;
  std::string preset;
};

std::map<std::string, std::string> hyper_echo(const stm::Hyperparams& hp) {
  return {
      {"topics", std::to_string(hp.topics)},
      {"sentiments", std::to_string(hp.sentiments)},
      {"labels", std::to_string(hp.labels)},
      {"alpha", format_double(hp.alpha)},
      {"beta1", format_double(hp.beta1)},
      {"beta2", format_double(hp.beta2)},
      {"gamma", format_double(hp.gamma)},
      {"delta1", format_double(hp.delta1)},
      {"delta2", format_double(hp.delta2)},
      {"iters", std::to_string(hp.iterations)},
      {"burn_in", std::to_string(hp.burn_in)},
      {"thin", std::to_string(hp.thin)},
      {"seed", std::to_string(hp.seed)},
  };
}

int run_train(const TrainCliOptions& opt) {
  const stm::Corpus corpus = stm::load_corpus(opt.corpus_path);
  const stm::Hyperparams hp = opt.hyper.resolved(corpus.vocab.size());
  hp.validate();

  const stm::Lexicon lexicon =
      opt.lexicon_path.empty() ? stm::Lexicon{} : stm::load_lexicon(opt.lexicon_path);
  const stm::EtaTable eta = stm::estimate_eta(corpus.vocab, lexicon, opt.default_eta);
  const auto pos_list = opt.pos_words_path.empty()
                            ? std::unordered_set<std::string>{}
                            : stm::load_word_list(opt.pos_words_path);
  const auto neg_list = opt.neg_words_path.empty()
                            ? std::unordered_set<std::string>{}
                            : stm::load_word_list(opt.neg_words_path);
  const stm::BaseMeasures base =
      stm::build_base_measures(corpus.vocab, pos_list, neg_list, opt.boost);

  std::ostringstream train_log;
  train_log << "# stm.trainlog v1\nsweep\tlog_joint\tseconds\n";
  stm::TrainOptions train_opt;
  train_opt.progress = opt.progress;
  train_opt.log_sink = [&train_log](int sweep, double log_joint, double seconds) {
    train_log << sweep << "\t" << format_double(log_joint) << "\t"
              << format_double(seconds) << "\n";
  };
  stm::TrainResult result = stm::train(corpus, eta, base, hp, train_opt);

  result.artifact.config_echo = hyper_echo(hp);
  result.artifact.config_echo["corpus"] = opt.corpus_path;
  result.artifact.config_echo["lexicon"] = opt.lexicon_path;
  result.artifact.config_echo["pos_words"] = opt.pos_words_path;
  result.artifact.config_echo["neg_words"] = opt.neg_words_path;
  result.artifact.config_echo["default_eta"] = format_double(opt.default_eta);
  result.artifact.config_echo["boost"] = format_double(opt.boost);
  stm::save_model(result.artifact, opt.output);

  if (!opt.train_log_path.empty()) {
    stm::atomic_write_file(opt.train_log_path, train_log.str());
  }
  if (!opt.assignments_path.empty()) {
    std::ostringstream out;
    out << echo_header("stm.assignments", {{"model", opt.output}});
    out << "doc_id\ttopic\tstates\n";
    for (size_t d = 0; d < corpus.docs.size(); ++d) {
      out << corpus.docs[d].id << "\t" << result.final_state.doc_topic[d] << "\t";
      const auto& states = result.final_state.token_state[d];
      for (size_t j = 0; j < states.size(); ++j) {
        out << state_char(states[j], corpus.docs[d].tokens[j]);
      }
      out << "\n";
    }
    stm::atomic_write_file(opt.assignments_path, out.str());
  }
  std::cerr << "train: " << hp.iterations << " sweeps, acceptance "
            << format_double(result.acceptance_rate) << ", model written to "
            << opt.output << "\n";
  return 0;
}

// --------------------------------------------------------------- predict

struct PredictCliOptions {
  std::string model_path, input, output;
  std::string format = "jsonl";
  std::string method = "loglik";
  std::string mode = "last";
  stm::PredictParams params;
  int cls_burn_in = 20;
  bool cls_burn_in_given = false;
  bool no_label_prior = false;
};

std::vector<stm::Document> load_unlabeled_docs(const std::string& path,
                                               const std::string& format,
                                               const stm::Vocabulary& vocab) {
  std::vector<stm::Document> docs;
  if (format == "corpus") {
    const stm::Corpus corpus = stm::load_corpus(path);
    for (const auto& d : corpus.docs) {
      std::vector<std::string> words;
      words.reserve(d.tokens.size());
      for (int32_t w : d.tokens) {
        if (w >= 0) words.push_back(corpus.vocab.word(w));
      }
      docs.push_back({d.id, stm::encode_tokens(words, vocab), std::nullopt});
    }
    return docs;
  }
  for (const auto& rec : load_records(path, format)) {
    const auto words = stm::preprocess_text(rec.text, {});
    docs.push_back({rec.id, stm::encode_tokens(words, vocab), std::nullopt});
  }
  return docs;
}

int run_predict(PredictCliOptions opt) {
  const stm::ModelArtifact model = stm::load_model(opt.model_path);
  const auto docs = load_unlabeled_docs(opt.input, opt.format, model.vocab);

  opt.params.method = opt.method == "sampling" ? stm::Method::kSampling
                                               : stm::Method::kLoglik;
  opt.params.loglik.burn_in = opt.cls_burn_in;
  opt.params.loglik.include_label_prior = !opt.no_label_prior;
  opt.params.sampling.mode = opt.mode == "mode-vote" ? stm::SamplingMode::kModeVote
                                                     : stm::SamplingMode::kLast;
  opt.params.sampling.burn_in =
      opt.cls_burn_in_given ? opt.cls_burn_in : opt.params.sampling.sweeps / 3;
  const stm::PredictResult result = stm::predict_corpus(docs, model, opt.params);

  std::map<std::string, std::string> echo{
      {"model", opt.model_path},
      {"input", opt.input},
      {"method", opt.method},
      {"seed", std::to_string(opt.params.seed)},
      {"label_prior", opt.no_label_prior ? "0" : "1"},
  };
  if (opt.params.method == stm::Method::kLoglik) {
    echo["samples"] = std::to_string(opt.params.loglik.samples);
    echo["burn_in"] = std::to_string(opt.params.loglik.burn_in);
  } else {
    echo["sweeps"] = std::to_string(opt.params.sampling.sweeps);
    echo["mode"] = opt.mode;
  }
  std::ostringstream out;
  out << echo_header("stm.predictions", echo);
  out << "doc_id\tlabel\tscore_pos\tscore_neg\tscore_sarc\n";
  for (const auto& p : result.predictions) {
    out << p.doc_id << "\t" << (p.label ? stm::label_name(*p.label) : "none");
    for (double s : p.scores) out << "\t" << format_double(s);
    out << "\n";
  }
  stm::atomic_write_file(opt.output, out.str());
  std::cerr << "predict: " << result.predictions.size() << " documents, "
            << result.null_predictions << " null (all tokens OOV)\n";
  return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string pred_path, gold_path, output;
};

std::map<std::string, int> load_gold_labels(const std::string& path) {
  std::map<std::string, int> gold;
  const std::string content = stm::read_file(path);
  if (!content.empty() && content[0] == '{') {  // corpus JSON
    const stm::Corpus corpus = stm::load_corpus(path);
    for (const auto& d : corpus.docs) {
      if (d.label) gold[d.id] = *d.label;
    }
    return gold;
  }
  const auto lines = stm::read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto fields = stm::split_tabs(lines[i]);
    if (fields.size() < 2) throw stm::ParseError(path, i + 1, "expected: doc_id<TAB>label");
    if (fields[0] == "doc_id") continue;  // header
    const auto label = stm::label_from_name(fields[1]);
    if (!label) throw stm::ParseError(path, i + 1, "unknown label: " + fields[1]);
    gold[fields[0]] = static_cast<int>(*label);
  }
  return gold;
}

int run_evaluate(const EvaluateOptions& opt) {
  const auto gold_by_id = load_gold_labels(opt.gold_path);
  std::vector<int> gold, pred;
  int64_t excluded_null = 0;
  const auto lines = stm::read_lines(opt.pred_path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto fields = stm::split_tabs(lines[i]);
    if (fields.size() < 2) throw stm::ParseError(opt.pred_path, i + 1, "short row");
    if (fields[0] == "doc_id") continue;
    if (fields[1] == "none") {
      ++excluded_null;
      continue;
    }
    const auto it = gold_by_id.find(fields[0]);
    if (it == gold_by_id.end()) {
      throw stm::DataError(opt.pred_path + ": no gold label for document " + fields[0]);
    }
    const auto label = stm::label_from_name(fields[1]);
    if (!label) throw stm::ParseError(opt.pred_path, i + 1, "unknown label: " + fields[1]);
    gold.push_back(it->second);
    pred.push_back(static_cast<int>(*label));
  }
  const stm::PrfMetrics metrics = stm::prf_metrics(gold, pred);

  std::ostringstream out;
  out << echo_header("stm.metrics", {{"pred", opt.pred_path},
                                     {"gold", opt.gold_path},
                                     {"evaluated", std::to_string(metrics.total)},
                                     {"excluded_null", std::to_string(excluded_null)}});
  out << "metric\tvalue\n";
  int64_t correct = 0;
  for (int g = 0; g < stm::kNumLabels; ++g) {
    for (int p = 0; p < stm::kNumLabels; ++p) {
      out << "confusion_" << stm::label_name(g) << "_" << stm::label_name(p) << "\t"
          << metrics.at(g, p) << "\n";
      if (g == p) correct += metrics.at(g, p);
    }
  }
  out << "accuracy\t"
      << format_double(metrics.total > 0
                           ? static_cast<double>(correct) / metrics.total
                           : 0.0)
      << "\n";
  out << "precision_sarcastic\t" << format_double(metrics.precision) << "\n";
  out << "recall_sarcastic\t" << format_double(metrics.recall) << "\n";
  out << "f1_sarcastic\t" << format_double(metrics.f1) << "\n";
  stm::atomic_write_file(opt.output, out.str());
  std::cout << "precision " << format_double(metrics.precision) << " recall "
            << format_double(metrics.recall) << " f1 " << format_double(metrics.f1)
            << "\n";
  return 0;
}

// --------------------------------------------------------------- reports

int run_report_topics(const std::string& model_path, const std::string& output,
                      int top_k) {
  const stm::ModelArtifact model = stm::load_model(model_path);
  std::ostringstream out;
  out << echo_header("stm.topics", {{"model", model_path},
                                    {"top_k", std::to_string(top_k)}});
  out << "kind\ttopic\tsentiment\trank\tword\tprob\n";
  for (const auto& e : stm::top_words_report(model, top_k)) {
    out << e.kind << "\t";
    if (e.topic >= 0) {
      out << e.topic;
    } else {
      out << "-";
    }
    out << "\t" << (e.sentiment == 0 ? "positive" : e.sentiment == 1 ? "negative" : "-")
        << "\t" << e.rank << "\t" << e.word << "\t" << format_double(e.prob) << "\n";
  }
  stm::atomic_write_file(output, out.str());
  return 0;
}

int run_report_plz(const std::string& model_path, const std::string& output) {
  const stm::ModelArtifact model = stm::load_model(model_path);
  const auto plz = stm::label_given_topic(model);
  std::ostringstream out;
  out << echo_header("stm.plz", {{"model", model_path}});
  out << "topic\tp_positive\tp_negative\tp_sarcastic\n";
  const int L = model.hyper.labels;
  for (int z = 0; z < model.hyper.topics; ++z) {
    out << z;
    for (int l = 0; l < L; ++l) {
      out << "\t" << format_double(plz[static_cast<size_t>(z) * L + l]);
    }
    out << "\n";
  }
  stm::atomic_write_file(output, out.str());
  return 0;
}

struct HistOptions {
  std::string model_path, corpus_path, output, assignments_path;
  int bins = 11;
  uint64_t seed = 0;
};

stm::LatentState load_assignments(const std::string& path, const stm::Corpus& corpus) {
  std::map<std::string, std::pair<int32_t, std::string>> by_id;
  const auto lines = stm::read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto fields = stm::split_tabs(lines[i]);
    if (fields[0] == "doc_id") continue;
    if (fields.size() != 3) throw stm::ParseError(path, i + 1, "expected 3 columns");
    try {
      by_id[fields[0]] = {std::stoi(fields[1]), fields[2]};
    } catch (const std::exception&) {
      throw stm::ParseError(path, i + 1, "bad topic id: " + fields[1]);
    }
  }
  stm::LatentState state;
  for (const auto& doc : corpus.docs) {
    const auto it = by_id.find(doc.id);
    if (it == by_id.end()) {
      throw stm::DataError(path + ": no assignments for document " + doc.id);
    }
    const auto& [z, chars] = it->second;
    if (chars.size() != doc.tokens.size()) {
      throw stm::DataError(path + ": assignment length mismatch for document " + doc.id);
    }
    std::vector<uint8_t> states(chars.size(), stm::kTopicWord);
    for (size_t j = 0; j < chars.size(); ++j) {
      if (chars[j] == 'p') states[j] = stm::kSentPos;
      if (chars[j] == 'n') states[j] = stm::kSentNeg;
    }
    state.doc_topic.push_back(z);
    state.token_state.push_back(std::move(states));
  }
  return state;
}

int run_report_hist(const HistOptions& opt) {
  const stm::ModelArtifact model = stm::load_model(opt.model_path);
  stm::Corpus corpus = stm::load_corpus(opt.corpus_path);

  stm::LatentState state;
  if (!opt.assignments_path.empty()) {
    state = load_assignments(opt.assignments_path, corpus);
  } else {
    // no training-state file: one posterior draw per document from the
    // frozen artifact (documents must carry labels and use the model vocab)
    for (auto& doc : corpus.docs) {
      if (!doc.label) throw stm::DataError("corpus document " + doc.id + " has no label");
      std::vector<std::string> words;
      for (int32_t w : doc.tokens) {
        if (w >= 0) words.push_back(corpus.vocab.word(w));
      }
      doc.tokens = stm::encode_tokens(words, model.vocab);
      stm::Rng rng = stm::Rng::derive(opt.seed, doc.id);
      auto [z, states] = stm::sample_assignments(doc, *doc.label, model, rng);
      state.doc_topic.push_back(z);
      state.token_state.push_back(std::move(states));
    }
  }

  const auto hist = stm::sentiment_proportion_histogram(corpus, state, opt.bins);
  std::ostringstream out;
  std::map<std::string, std::string> echo{
      {"model", opt.model_path},
      {"corpus", opt.corpus_path},
      {"bins", std::to_string(opt.bins)},
      {"assignments", opt.assignments_path.empty() ? "<sampled>" : opt.assignments_path},
  };
  for (size_t l = 0; l < hist.included.size(); ++l) {
    echo["included_" + std::string(stm::label_name(static_cast<int>(l)))] =
        std::to_string(hist.included[l]);
    echo["excluded_" + std::string(stm::label_name(static_cast<int>(l)))] =
        std::to_string(hist.excluded[l]);
  }
  out << echo_header("stm.hist", echo);
  out << "label\tbin\tpercentage\n";
  for (size_t l = 0; l < hist.percent.size(); ++l) {
    for (int b = 0; b < hist.bins; ++b) {
      const int center = static_cast<int>(std::lround(100.0 * b / (hist.bins - 1)));
      out << stm::label_name(static_cast<int>(l)) << "\t" << center << "\t"
          << format_double(hist.percent[l][b]) << "\n";
    }
  }
  stm::atomic_write_file(opt.output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sarcasm topic model: ingest, train, predict, evaluate, report"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style config file; CLI flags override it");

  IngestOptions ingest_opt;
  auto* ingest = app.add_subcommand("ingest", "raw tweets -> encoded corpus file");
  ingest->add_option("--input", ingest_opt.input, "raw JSONL or TSV file")->required();
  ingest->add_option("--format", ingest_opt.format, "jsonl|tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  ingest->add_option("--out", ingest_opt.output, "corpus JSON output")->required();
  ingest->add_option("--function-words", ingest_opt.function_words_path,
                     "function-word list, one per line");
  ingest->add_option("--hashtag-rules", ingest_opt.rules_path,
                     "TSV: hashtag<TAB>label (default: built-in rules)");
  ingest->add_option("--min-count", ingest_opt.corpus.min_count,
                     "prune words with corpus frequency below this")
      ->check(CLI::PositiveNumber);
  ingest->add_option("--min-doc-len", ingest_opt.corpus.min_doc_len,
                     "drop documents shorter than this after pruning")
      ->check(CLI::PositiveNumber);
  ingest->add_option("--preset", ingest_opt.preset,
                     "named defaults; \"paper\" pins min-count=3, min-doc-len=3")
      ->check(CLI::IsMember({"paper"}));

  TrainCliOptions train_opt;
  auto* train = app.add_subcommand("train", "corpus + lexicon -> model file");
  train->add_option("--corpus", train_opt.corpus_path, "corpus JSON from ingest")->required();
  train->add_option("--out", train_opt.output, "model JSON output")->required();
  train->add_option("--lexicon", train_opt.lexicon_path,
                    "sense-level lexicon TSV: word<TAB>pos<TAB>neg");
  train->add_option("--pos-words", train_opt.pos_words_path, "positive word list");
  train->add_option("--neg-words", train_opt.neg_words_path, "negative word list");
  train->add_option("--default-eta", train_opt.default_eta,
                    "switch probability for words absent from the lexicon")
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--boost", train_opt.boost, "base-measure boost for listed words")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--topics", train_opt.hyper.topics, "number of topics Z")
      ->check(CLI::PositiveNumber);
  train->add_option("--alpha", train_opt.hyper.alpha, "doc-topic concentration");
  train->add_option("--beta1", train_opt.hyper.beta1, "parent sentiment concentration");
  train->add_option("--beta2", train_opt.hyper.beta2, "child sentiment concentration");
  train->add_option("--gamma", train_opt.hyper.gamma, "topic-word concentration");
  train->add_option("--delta1", train_opt.hyper.delta1,
                    "parent sentiment-word concentration (<=0: 0.1*V)");
  train->add_option("--delta2", train_opt.hyper.delta2,
                    "child sentiment-word concentration (<=0: 0.1*V)");
  train->add_option("--iters", train_opt.hyper.iterations, "Gibbs sweeps")
      ->check(CLI::PositiveNumber);
  train->add_option("--burn-in", train_opt.hyper.burn_in, "sweeps before averaging")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--thin", train_opt.hyper.thin, "snapshot every thin-th sweep")
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", train_opt.hyper.seed, "rng seed");
  train->add_option("--train-log", train_opt.train_log_path,
                    "TSV trace: sweep, log_joint, seconds");
  train->add_option("--assignments-out", train_opt.assignments_path,
                    "final per-token assignments TSV (for report-hist)");
  train->add_flag("--progress", train_opt.progress, "per-sweep progress on stderr");
  train->add_option("--preset", train_opt.preset,
                    "named defaults; \"paper\" pins topics=50")
      ->check(CLI::IsMember({"paper"}));

  PredictCliOptions predict_opt;
  auto* predict = app.add_subcommand("predict", "model + unlabeled tweets -> predictions TSV");
  predict->add_option("--model", predict_opt.model_path, "model JSON")->required();
  predict->add_option("--input", predict_opt.input, "JSONL, TSV, or corpus JSON")->required();
  predict->add_option("--format", predict_opt.format, "jsonl|tsv|corpus")
      ->check(CLI::IsMember({"jsonl", "tsv", "corpus"}));
  predict->add_option("--out", predict_opt.output, "predictions TSV")->required();
  predict->add_option("--method", predict_opt.method, "loglik|sampling")
      ->check(CLI::IsMember({"loglik", "sampling"}));
  predict->add_option("--samples", predict_opt.params.loglik.samples,
                      "per-label chain length (loglik)")
      ->check(CLI::PositiveNumber);
  predict->add_option("--cls-burn-in", predict_opt.cls_burn_in,
                      "chain burn-in (loglik / mode-vote)")
      ->check(CLI::NonNegativeNumber);
  predict->add_option("--sweeps", predict_opt.params.sampling.sweeps,
                      "chain length (sampling)")
      ->check(CLI::PositiveNumber);
  predict->add_option("--mode", predict_opt.mode, "last|mode-vote (sampling)")
      ->check(CLI::IsMember({"last", "mode-vote"}));
  predict->add_flag("--no-label-prior", predict_opt.no_label_prior,
                    "drop log p(l) from log-likelihood scores");
  predict->add_option("--seed", predict_opt.params.seed, "rng seed");
  predict->add_option("--jobs", predict_opt.params.jobs, "parallel workers")
      ->check(CLI::PositiveNumber);

  EvaluateOptions eval_opt;
  auto* evaluate = app.add_subcommand("evaluate", "predictions + gold -> metrics TSV");
  evaluate->add_option("--pred", eval_opt.pred_path, "predictions TSV")->required();
  evaluate->add_option("--gold", eval_opt.gold_path,
                       "gold labels: TSV doc_id<TAB>label, or a corpus JSON")
      ->required();
  evaluate->add_option("--out", eval_opt.output, "metrics TSV")->required();

  std::string rt_model, rt_out;
  int rt_top_k = 5;
  auto* report_topics = app.add_subcommand("report-topics", "top words per topic/sentiment");
  report_topics->add_option("--model", rt_model, "model JSON")->required();
  report_topics->add_option("--out", rt_out, "report TSV")->required();
  report_topics->add_option("--top-k", rt_top_k, "words per distribution")
      ->check(CLI::PositiveNumber);

  std::string rp_model, rp_out;
  auto* report_plz = app.add_subcommand("report-plz", "label probability per topic");
  report_plz->add_option("--model", rp_model, "model JSON")->required();
  report_plz->add_option("--out", rp_out, "report TSV")->required();

  HistOptions hist_opt;
  auto* report_hist = app.add_subcommand("report-hist", "sentiment-mixture histogram");
  report_hist->add_option("--model", hist_opt.model_path, "model JSON")->required();
  report_hist->add_option("--corpus", hist_opt.corpus_path, "labeled corpus JSON")->required();
  report_hist->add_option("--out", hist_opt.output, "report TSV")->required();
  report_hist->add_option("--assignments", hist_opt.assignments_path,
                          "assignments TSV from train --assignments-out");
  report_hist->add_option("--bins", hist_opt.bins, "histogram bins")
      ->check(CLI::Range(2, 101));
  report_hist->add_option("--seed", hist_opt.seed, "rng seed for sampled assignments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const stm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  predict_opt.cls_burn_in_given = predict->count("--cls-burn-in") > 0;

  // the paper preset pins the published corpus/model shape unless flags
  // explicitly override it
  if (train_opt.preset == "paper" && !train->count("--topics")) {
    train_opt.hyper.topics = 50;
  }
  if (ingest_opt.preset == "paper") {
    if (!ingest->count("--min-count")) ingest_opt.corpus.min_count = 3;
    if (!ingest->count("--min-doc-len")) ingest_opt.corpus.min_doc_len = 3;
  }

  try {
    if (*ingest) return run_ingest(ingest_opt);
    if (*train) return run_train(train_opt);
    if (*predict) return run_predict(predict_opt);
    if (*evaluate) return run_evaluate(eval_opt);
    if (*report_topics) return run_report_topics(rt_model, rt_out, rt_top_k);
    if (*report_plz) return run_report_plz(rp_model, rp_out);
    if (*report_hist) return run_report_hist(hist_opt);
  } catch (const stm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
