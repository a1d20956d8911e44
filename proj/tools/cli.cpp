#include "cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>

#include "qfsum/corpus.hpp"
#include "qfsum/embeddings.hpp"
#include "qfsum/error.hpp"
#include "qfsum/features.hpp"
#include "qfsum/harness.hpp"
#include "qfsum/labeling.hpp"
#include "qfsum/rl.hpp"
#include "qfsum/rouge.hpp"
#include "qfsum/scorer.hpp"
#include "qfsum/summarizer.hpp"
#include "qfsum/synthetic.hpp"
#include "qfsum/util.hpp"

namespace qfsum::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string runs_root = "runs";
  std::string run_dir;
  std::string log_level = "warn";
};

struct FeatureOptions {
  std::string embeddings;
  std::string contextual;
};

struct ScorerOverrides {
  std::optional<int> batch_size;
  std::optional<double> dropout;
  std::optional<int> epochs;
  std::optional<int> max_len;
  std::optional<int> hidden;
  std::optional<double> learning_rate;

  void apply(ScorerConfig& c) const {
    if (batch_size) c.batch_size = *batch_size;
    if (dropout) c.dropout = *dropout;
    if (epochs) c.epochs = *epochs;
    if (max_len) c.max_sentence_len = *max_len;
    if (hidden) c.hidden_dim = *hidden;
    if (learning_rate) c.learning_rate = *learning_rate;
  }
};

struct PpoOverrides {
  std::optional<int> horizon;
  std::optional<int> minibatches;
  std::optional<long> timesteps;
  std::optional<double> learning_rate;
  std::optional<int> hidden;
  std::optional<int> eval_samples;
  std::optional<long> eval_interval;
  std::optional<int> update_epochs;

  void apply(rl::PpoConfig& c) const {
    if (horizon) c.horizon = *horizon;
    if (minibatches) c.minibatches = *minibatches;
    if (timesteps) c.total_timesteps = *timesteps;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (hidden) c.hidden_dim = *hidden;
    if (eval_samples) c.eval_samples = *eval_samples;
    if (eval_interval) c.eval_interval = *eval_interval;
    if (update_epochs) c.update_epochs = *update_epochs;
  }
};

struct Options {
  Common common;
  FeatureOptions features;
  ScorerOverrides scorer;
  PpoOverrides ppo;
  std::string input;
  std::string corpus;
  std::string test_corpus;
  std::string labels;
  std::string model;
  std::string policy;
  std::string variant = "nnc";
  std::vector<std::string> methods;
  std::string candidate;
  std::vector<std::string> references;
  int cap = kDefaultCandidateCap;
  int positives = kPositiveLabels;
  int k = 10;
  bool split = false;
  std::optional<int> samples;
  SyntheticSpec synth;
};

std::uint64_t require_seed(const Common& c, std::string_view command) {
  if (!c.seed) throw UsageError(std::string(command) + " requires --seed");
  return *c.seed;
}

struct LoadedCorpus {
  std::vector<Question> questions;
  std::string hash;
};

LoadedCorpus load_questions(const std::string& path) {
  const auto bytes = read_file(path);
  return {load_corpus(bytes), hex64(fnv1a64(bytes))};
}

struct LoadedFeatures {
  std::unique_ptr<EmbeddingTable> table;
  std::unique_ptr<ContextualStore> store;
  std::unique_ptr<FeatureSource> source;
  std::string hash;
};

LoadedFeatures load_features(const FeatureOptions& o, bool required) {
  if (!o.embeddings.empty() && !o.contextual.empty()) {
    throw UsageError("give either --embeddings or --contextual, not both");
  }
  LoadedFeatures f;
  if (!o.embeddings.empty()) {
    const auto bytes = read_file(o.embeddings);
    f.hash = hex64(fnv1a64(bytes));
    f.table = std::make_unique<EmbeddingTable>(load_word_vectors(bytes));
    f.source = std::make_unique<WordVectorFeatures>(*f.table);
  } else if (!o.contextual.empty()) {
    const auto bytes = read_file(o.contextual);
    f.hash = hex64(fnv1a64(bytes));
    f.store = std::make_unique<ContextualStore>(load_contextual(bytes));
    f.source = std::make_unique<ContextualFeatures>(*f.store);
  } else if (required) {
    throw UsageError("an embedding source is required (--embeddings or --contextual)");
  }
  return f;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Output directory for one command; every file is written atomically.
class RunDir {
 public:
  RunDir(const Common& common, const json& manifest) {
    const std::string hash = hex64(fnv1a64(manifest.dump())).substr(0, 12);
    if (!common.run_dir.empty()) {
      path_ = common.run_dir;
    } else {
      const fs::path base = fs::path(common.runs_root) / (utc_stamp() + "-" + hash);
      path_ = base;
      for (int i = 1; fs::exists(path_); ++i) {
        path_ = base.string() + "." + std::to_string(i);
      }
    }
    fs::create_directories(path_);
    write("manifest.json", manifest.dump(2) + "\n");
  }

  void write(const std::string& name, std::string_view contents) const {
    write_file_atomic(path_ / name, contents);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

json manifest_for(std::string_view command, json config, json inputs) {
  return {{"command", command},
          {"config", std::move(config)},
          {"inputs", std::move(inputs)},
          {"version", "0.1.0"}};
}

std::string dump_metrics(const json& j) { return j.dump(2) + "\n"; }

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScorerModel load_model(const std::string& path) {
  return decode_scorer(read_file(path));
}

void finish(std::ostream& out, const RunDir& dir) {
  out << "run directory: " << dir.path().string() << "\n";
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto corpus = load_questions(o.input);
  std::size_t evaluable = 0;
  for (const auto& q : corpus.questions) evaluable += is_evaluable(q, o.cap) ? 1 : 0;
  RunDir dir(o.common, manifest_for("ingest", {{"cap", o.cap}},
                                    {{"input", o.input}, {"corpus_hash", corpus.hash}}));
  dir.write("corpus.jsonl", write_corpus_dump(corpus.questions));
  dir.write("metrics.json", dump_metrics({{"questions", corpus.questions.size()},
                                          {"evaluable", evaluable}}));
  finish(out, dir);
  return kOk;
}

int cmd_label(const Options& o, std::ostream& out) {
  const auto corpus = load_questions(o.corpus);
  const auto labeled = prepare_labeled(corpus.questions, o.cap, o.positives);
  std::vector<QuestionLabels> labels;
  for (const auto& lq : labeled) {
    labels.push_back({lq.question.id, lq.targets, lq.labels});
  }
  RunDir dir(o.common,
             manifest_for("label", {{"cap", o.cap}, {"positives", o.positives}},
                          {{"corpus", o.corpus}, {"corpus_hash", corpus.hash}}));
  dir.write("labels.jsonl", write_label_cache(labels));
  dir.write("metrics.json", dump_metrics({{"labeled", labels.size()},
                                          {"skipped", corpus.questions.size() - labels.size()}}));
  finish(out, dir);
  return kOk;
}

std::optional<std::map<std::string, QuestionLabels>> load_label_cache(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_label_cache(read_file(path));
}

json feature_inputs(const FeatureOptions& f, const LoadedFeatures& lf) {
  json j = json::object();
  if (!f.embeddings.empty()) j["embeddings"] = f.embeddings;
  if (!f.contextual.empty()) j["contextual"] = f.contextual;
  if (!lf.hash.empty()) j["embeddings_hash"] = lf.hash;
  return j;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto seed = require_seed(o.common, "train");
  ScorerConfig config = ScorerConfig::defaults_for(parse_scorer_variant(o.variant));
  o.scorer.apply(config);
  config.seed = seed;
  config.validate();
  const auto corpus = load_questions(o.corpus);
  const auto features = load_features(o.features, true);
  const auto cache = load_label_cache(o.labels);
  const auto labeled =
      prepare_labeled(corpus.questions, o.cap, kPositiveLabels, cache ? &*cache : nullptr);

  json inputs = feature_inputs(o.features, features);
  inputs["corpus"] = o.corpus;
  inputs["corpus_hash"] = corpus.hash;
  if (!o.labels.empty()) inputs["labels"] = o.labels;
  RunDir dir(o.common, manifest_for("train",
                                    {{"scorer", to_json(config)}, {"cap", o.cap},
                                     {"jobs", o.common.jobs}},
                                    inputs));
  TrainOptions topts;
  topts.jobs = o.common.jobs;
  topts.on_epoch = [](int epoch, double loss) {
    spdlog::info("epoch {} loss {:.6f}", epoch + 1, loss);
  };
  const auto result = train_scorer(labeled, *features.source, config, topts);
  std::string log = "epoch\tloss\n";
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    log += std::to_string(e + 1) + "\t" + format_g17(result.epoch_losses[e]) + "\n";
  }
  dir.write("model.qfck", encode_scorer(result.model));
  dir.write("train_log.tsv", log);
  dir.write("metrics.json",
            dump_metrics({{"variant", to_string(config.variant)},
                          {"questions", labeled.size()},
                          {"epoch_losses", result.epoch_losses},
                          {"final_loss", result.epoch_losses.empty()
                                             ? json(nullptr)
                                             : json(result.epoch_losses.back())},
                          {"model_hash", hex64(fnv1a64(encode_scorer(result.model)))}}));
  finish(out, dir);
  return kOk;
}

// A scorer from --model or from a baseline --method.
struct ScorerSource {
  std::unique_ptr<ScorerModel> model;
  CandidateScorer scorer;
  std::string name;
};

ScorerSource scorer_from_options(const Options& o, const LoadedFeatures& features,
                                 std::span<const Question> train, std::uint64_t seed) {
  ScorerSource s;
  if (!o.model.empty()) {
    if (!o.methods.empty()) throw UsageError("give either --model or --method, not both");
    if (!features.source) throw UsageError("--model needs --embeddings or --contextual");
    s.model = std::make_unique<ScorerModel>(load_model(o.model));
    s.scorer = model_candidate_scorer(*s.model, *features.source);
    s.name = std::string(to_string(s.model->config.variant));
    return s;
  }
  const std::string method = o.methods.empty() ? "firstn" : o.methods.front();
  auto desc = MethodDescriptor::parse(method);
  if (desc.kind == MethodDescriptor::Kind::kScorer) {
    if (train.empty()) {
      throw UsageError("method '" + method + "' needs training data (use --split)");
    }
    o.scorer.apply(desc.scorer);
  }
  HarnessOptions h;
  h.features = features.source.get();
  h.cap = o.cap;
  h.jobs = o.common.jobs;
  s.scorer = make_candidate_scorer(desc, train, h, seed);
  s.name = desc.name();
  return s;
}

int cmd_summarize(const Options& o, std::ostream& out) {
  const std::uint64_t seed = o.common.seed.value_or(0);
  const auto corpus = load_questions(o.corpus);
  const auto features = load_features(o.features, false);
  json inputs = feature_inputs(o.features, features);
  inputs["corpus"] = o.corpus;
  inputs["corpus_hash"] = corpus.hash;
  if (!o.model.empty()) inputs["model_hash"] = hex64(fnv1a64(read_file(o.model)));
  const auto source = scorer_from_options(o, features, {}, seed);
  RunDir dir(o.common, manifest_for("summarize",
                                    {{"method", source.name}, {"cap", o.cap}, {"seed", seed}},
                                    inputs));
  std::vector<SummaryResult> summaries;
  std::vector<AuditRecord> audit;
  for (const auto& q : corpus.questions) {
    const auto pool = build_candidates(q, o.cap);
    std::vector<double> scores = pool.empty() ? std::vector<double>{} : source.scorer(q, pool);
    auto summary = select_top_n(scores, pool, n_for_type(q.type));
    summary.question_id = q.id;
    summaries.push_back(summary);
    audit.push_back({std::move(summary), std::move(scores)});
  }
  dir.write("answers.json", write_answer_file(summaries));
  dir.write("audit.jsonl", write_audit_file(audit));
  finish(out, dir);
  return kOk;
}

json per_question_json(std::span<const QuestionResult> results) {
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back({{"id", r.summary.question_id}, {"f1", r.f1},
                   {"selected", r.summary.selected}});
  }
  return arr;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto corpus = load_questions(o.corpus);
  const auto features = load_features(o.features, false);
  std::vector<Question> train;
  std::vector<Question> test = corpus.questions;
  std::uint64_t seed = o.common.seed.value_or(0);
  if (o.split) {
    seed = require_seed(o.common, "evaluate --split");
    auto s = split_ratio(corpus.questions, seed);
    train = std::move(s.train);
    test = std::move(s.test);
  }
  if (!o.test_corpus.empty()) throw UsageError("evaluate does not take --test-corpus");
  const bool trains = o.model.empty() && !o.methods.empty() &&
                      MethodDescriptor::parse(o.methods.front()).kind ==
                          MethodDescriptor::Kind::kScorer;
  if (trains) require_seed(o.common, "evaluate with a trainable method");
  json inputs = feature_inputs(o.features, features);
  inputs["corpus"] = o.corpus;
  inputs["corpus_hash"] = corpus.hash;
  if (!o.model.empty()) inputs["model_hash"] = hex64(fnv1a64(read_file(o.model)));
  json config = {{"cap", o.cap}, {"split", o.split}, {"seed", seed},
                 {"jobs", o.common.jobs}};
  if (!o.methods.empty()) config["method"] = o.methods.front();
  if (trains) {
    auto desc = MethodDescriptor::parse(o.methods.front());
    o.scorer.apply(desc.scorer);
    config["scorer"] = to_json(desc.scorer);
  }
  RunDir dir(o.common, manifest_for("evaluate", config, inputs));
  const auto source = scorer_from_options(o, features, train, seed);
  const auto results = summarize_and_score(test, source.scorer, o.cap, o.common.jobs);
  if (results.empty()) throw ValidationError("no evaluable question in the evaluation set");
  const double mean = mean_f1(results);
  std::vector<EvalReport> reports{EvalReport::from_scores(source.name, {mean})};
  dir.write("metrics.json", dump_metrics({{"method", source.name},
                                          {"questions", results.size()},
                                          {"mean_f1", mean},
                                          {"per_question", per_question_json(results)}}));
  dir.write("report.txt", report_table(reports));
  out << report_table(reports);
  finish(out, dir);
  return kOk;
}

int cmd_crossval(const Options& o, std::ostream& out) {
  const auto seed = require_seed(o.common, "crossval");
  const auto corpus = load_questions(o.corpus);
  const auto features = load_features(o.features, false);
  const auto cache = load_label_cache(o.labels);
  std::vector<MethodDescriptor> methods;
  json method_configs = json::array();
  for (const auto& name : o.methods.empty() ? std::vector<std::string>{"firstn"} : o.methods) {
    auto d = MethodDescriptor::parse(name);
    if (d.kind == MethodDescriptor::Kind::kScorer) {
      o.scorer.apply(d.scorer);
      d.scorer.validate();
      if (!features.source) throw UsageError("method '" + name + "' needs an embedding source");
      method_configs.push_back({{"method", name}, {"scorer", to_json(d.scorer)}});
    } else {
      method_configs.push_back({{"method", name}});
    }
    methods.push_back(d);
  }
  json inputs = feature_inputs(o.features, features);
  inputs["corpus"] = o.corpus;
  inputs["corpus_hash"] = corpus.hash;
  RunDir dir(o.common, manifest_for("crossval",
                                    {{"methods", method_configs}, {"k", o.k},
                                     {"seed", seed}, {"cap", o.cap},
                                     {"jobs", o.common.jobs}},
                                    inputs));
  HarnessOptions h;
  h.features = features.source.get();
  h.cap = o.cap;
  h.jobs = o.common.jobs;
  h.label_cache = cache ? &*cache : nullptr;
  std::vector<EvalReport> reports;
  for (const auto& m : methods) reports.push_back(cross_validate(m, corpus.questions, o.k, seed, h));
  dir.write("report.json", dump_metrics(report_json(reports)));
  dir.write("report.txt", report_table(reports));
  out << report_table(reports);
  finish(out, dir);
  return kOk;
}

int cmd_rl_train(const Options& o, std::ostream& out) {
  rl::PpoConfig config;
  config.seed = require_seed(o.common, "rl-train");
  o.ppo.apply(config);
  config.validate();
  const auto corpus = load_questions(o.corpus);
  const auto features = load_features(o.features, true);
  std::vector<Question> train_q, test_q;
  if (!o.test_corpus.empty()) {
    train_q = corpus.questions;
    test_q = load_questions(o.test_corpus).questions;
  } else {
    auto s = split_ratio(corpus.questions, config.seed);
    train_q = std::move(s.train);
    test_q = std::move(s.test);
  }
  const auto train = rl::prepare_episodes(train_q, *features.source, o.cap);
  const auto test = rl::prepare_episodes(test_q, *features.source, o.cap);

  json inputs = feature_inputs(o.features, features);
  inputs["corpus"] = o.corpus;
  inputs["corpus_hash"] = corpus.hash;
  if (!o.test_corpus.empty()) inputs["test_corpus"] = o.test_corpus;
  RunDir dir(o.common, manifest_for("rl-train",
                                    {{"ppo", rl::to_json(config)}, {"cap", o.cap},
                                     {"jobs", o.common.jobs}},
                                    inputs));
  rl::RlTrainOptions ropts;
  ropts.jobs = o.common.jobs;
  ropts.on_eval = [](const rl::CurvePoint& p) {
    spdlog::info("timestep {} test ROUGE-SU4 F1 {:.4f}", p.timestep, p.score);
  };
  const auto result = rl::rl_train(train, test, config, ropts);
  const auto firstn_results = summarize_and_score(
      test_q, make_candidate_scorer(MethodDescriptor::parse("firstn"), {}, {}, 0), o.cap,
      o.common.jobs);
  std::string curve = "timestep\tscore\n";
  json curve_json = json::array();
  for (const auto& p : result.curve) {
    curve += std::to_string(p.timestep) + "\t" + format_g17(p.score) + "\n";
    curve_json.push_back({{"timestep", p.timestep}, {"score", p.score}});
  }
  dir.write("policy.qfck", rl::encode_policy(result.best_params, config, features.source->dim()));
  dir.write("curve.tsv", curve);
  dir.write("metrics.json", dump_metrics({{"best_score", result.best_score},
                                          {"best_timestep", result.best_timestep},
                                          {"firstn_test", mean_f1(firstn_results)},
                                          {"train_questions", train.size()},
                                          {"test_questions", test.size()},
                                          {"curve", curve_json}}));
  finish(out, dir);
  return kOk;
}

int cmd_rl_eval(const Options& o, std::ostream& out) {
  const std::uint64_t seed = o.common.seed.value_or(0);
  const auto corpus = load_questions(o.corpus);
  const auto features = load_features(o.features, true);
  const auto policy_bytes = read_file(o.policy);
  const auto ck = rl::decode_policy(policy_bytes);
  if (ck.embedding_dim != features.source->dim()) {
    throw ShapeError("policy expects embeddings of dim " + std::to_string(ck.embedding_dim) +
                     ", got " + std::to_string(features.source->dim()));
  }
  const int samples = o.samples.value_or(ck.config.eval_samples);
  if (samples < 1) throw UsageError("--samples must be >= 1");
  json inputs = feature_inputs(o.features, features);
  inputs["corpus"] = o.corpus;
  inputs["corpus_hash"] = corpus.hash;
  inputs["policy_hash"] = hex64(fnv1a64(policy_bytes));
  RunDir dir(o.common, manifest_for("rl-eval",
                                    {{"samples", samples}, {"seed", seed}, {"cap", o.cap}},
                                    inputs));
  std::vector<SummaryResult> summaries;
  json per_question = json::array();
  double total = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < corpus.questions.size(); ++i) {
    const auto& q = corpus.questions[i];
    rl::EpisodeData episode;
    try {
      episode = rl::prepare_episode(q, *features.source, o.cap);
    } catch (const ValidationError& e) {
      spdlog::warn("skipping question: {}", e.what());
      continue;
    }
    Rng rng(Rng::derive(seed, i));
    auto r = rl::rl_summarize(ck.params, episode, samples, rng);
    total += r.reward;
    ++scored;
    per_question.push_back({{"id", q.id}, {"f1", r.reward}, {"selected", r.summary.selected}});
    summaries.push_back(std::move(r.summary));
  }
  if (scored == 0) throw ValidationError("no evaluable question in the corpus");
  dir.write("answers.json", write_answer_file(summaries));
  dir.write("metrics.json",
            dump_metrics({{"questions", scored},
                          {"mean_f1", total / static_cast<double>(scored)},
                          {"per_question", per_question}}));
  finish(out, dir);
  return kOk;
}

int cmd_rouge(const Options& o, std::ostream& out) {
  const auto candidate = tokenize(read_file(o.candidate));
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : o.references) refs.push_back(tokenize(read_file(r)));
  const auto score = rouge_su4_multi(candidate, refs);
  char buf[96];
  std::snprintf(buf, sizeof buf, "P=%.4f R=%.4f F1=%.4f\n", score.precision, score.recall,
                score.f1);
  out << buf;
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  SyntheticSpec spec = o.synth;
  spec.seed = require_seed(o.common, "synth");
  spec.validate();
  const auto corpus = make_synthetic(spec);
  RunDir dir(o.common, manifest_for("synth",
                                    {{"questions", spec.questions},
                                     {"candidates", spec.candidates},
                                     {"marked", spec.marked},
                                     {"topics", spec.topics},
                                     {"dim", spec.dim},
                                     {"noise", spec.noise},
                                     {"mixed_types", spec.mixed_types},
                                     {"seed", spec.seed}},
                                    json::object()));
  dir.write("corpus.json", serialize_bioasq(corpus.questions));
  dir.write("vectors.txt", corpus.table.to_word2vec_text());
  dir.write("marked.json", dump_metrics(json(corpus.marked)));
  finish(out, dir);
  return kOk;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--seed", o.common.seed, "Random seed (required for training)");
  app->add_option("--jobs", o.common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--runs-root", o.common.runs_root, "Parent of generated run directories");
  app->add_option("--run-dir", o.common.run_dir, "Exact output directory");
  app->add_option("--cap", o.cap, "Candidate pool cap")->check(CLI::PositiveNumber);
}

void add_features(CLI::App* app, Options& o) {
  app->add_option("--embeddings", o.features.embeddings, "word2vec text file");
  app->add_option("--contextual", o.features.contextual, "Contextual embedding file");
}

void add_scorer_overrides(CLI::App* app, Options& o) {
  app->add_option("--batch-size", o.scorer.batch_size)->check(CLI::PositiveNumber);
  app->add_option("--dropout", o.scorer.dropout)->check(CLI::Range(0.0, 0.999));
  app->add_option("--epochs", o.scorer.epochs)->check(CLI::NonNegativeNumber);
  app->add_option("--max-len", o.scorer.max_len)->check(CLI::PositiveNumber);
  app->add_option("--hidden", o.scorer.hidden)->check(CLI::PositiveNumber);
  app->add_option("--lr", o.scorer.learning_rate)->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Query-focused extractive summarisation", "qfsum"};
  app.set_config("--config", "", "Config file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--log-level", o.common.log_level, "trace|debug|info|warn|error|off");

  auto* ingest = app.add_subcommand("ingest", "Normalize a BioASQ-style file");
  ingest->add_option("--input", o.input, "BioASQ JSON or corpus dump")->required();
  add_common(ingest, o);

  auto* label = app.add_subcommand("label", "Write the label cache");
  label->add_option("--corpus", o.corpus)->required();
  label->add_option("--positives", o.positives)->check(CLI::PositiveNumber);
  add_common(label, o);

  auto* train = app.add_subcommand("train", "Train a supervised scorer");
  train->add_option("--corpus", o.corpus)->required();
  train->add_option("--variant", o.variant, "nnr|nnc|mean-contextual|contextual-lstm|"
                                            "siamese-lstm|sbert-r|sbert-c|sbert-m-r|sbert-m-c");
  train->add_option("--labels", o.labels, "Label cache from `label`");
  add_common(train, o);
  add_features(train, o);
  add_scorer_overrides(train, o);

  auto* summarize = app.add_subcommand("summarize", "Write an answer file");
  summarize->add_option("--corpus", o.corpus)->required();
  summarize->add_option("--model", o.model, "Scorer checkpoint");
  summarize->add_option("--method", o.methods, "firstn|random|constant");
  add_common(summarize, o);
  add_features(summarize, o);

  auto* evaluate = app.add_subcommand("evaluate", "Score summaries with ROUGE-SU4");
  evaluate->add_option("--corpus", o.corpus)->required();
  evaluate->add_option("--model", o.model, "Scorer checkpoint");
  evaluate->add_option("--method", o.methods, "Baseline or scorer variant");
  evaluate->add_flag("--split", o.split, "Train on 5/6 of the corpus, evaluate on the rest");
  add_common(evaluate, o);
  add_features(evaluate, o);
  add_scorer_overrides(evaluate, o);

  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation");
  crossval->add_option("--corpus", o.corpus)->required();
  crossval->add_option("--method", o.methods, "Repeatable: firstn|random|constant|<variant>");
  crossval->add_option("--k", o.k)->check(CLI::Range(2, 1000000));
  crossval->add_option("--labels", o.labels, "Label cache from `label`");
  add_common(crossval, o);
  add_features(crossval, o);
  add_scorer_overrides(crossval, o);

  auto* rl_train = app.add_subcommand("rl-train", "Train the PPO summarizer");
  rl_train->add_option("--corpus", o.corpus)->required();
  rl_train->add_option("--test-corpus", o.test_corpus, "Held-out questions (default: 5:1 split)");
  rl_train->add_option("--horizon", o.ppo.horizon)->check(CLI::PositiveNumber);
  rl_train->add_option("--minibatches", o.ppo.minibatches)->check(CLI::PositiveNumber);
  rl_train->add_option("--timesteps", o.ppo.timesteps)->check(CLI::PositiveNumber);
  rl_train->add_option("--lr", o.ppo.learning_rate)->check(CLI::PositiveNumber);
  rl_train->add_option("--hidden", o.ppo.hidden)->check(CLI::PositiveNumber);
  rl_train->add_option("--update-epochs", o.ppo.update_epochs)->check(CLI::PositiveNumber);
  rl_train->add_option("--eval-samples", o.ppo.eval_samples)->check(CLI::PositiveNumber);
  rl_train->add_option("--eval-interval", o.ppo.eval_interval)->check(CLI::PositiveNumber);
  add_common(rl_train, o);
  add_features(rl_train, o);

  auto* rl_eval = app.add_subcommand("rl-eval", "Summarize with a trained policy");
  rl_eval->add_option("--corpus", o.corpus)->required();
  rl_eval->add_option("--policy", o.policy)->required();
  rl_eval->add_option("--samples", o.samples, "Policy samples per decision");
  add_common(rl_eval, o);
  add_features(rl_eval, o);

  auto* rouge = app.add_subcommand("rouge", "ROUGE-SU4 of a candidate against references");
  rouge->add_option("--candidate", o.candidate)->required();
  rouge->add_option("--reference", o.references)->required();
  add_common(rouge, o);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus and word vectors");
  synth->add_option("--questions", o.synth.questions)->check(CLI::PositiveNumber);
  synth->add_option("--candidates", o.synth.candidates)->check(CLI::PositiveNumber);
  synth->add_option("--marked", o.synth.marked)->check(CLI::PositiveNumber);
  synth->add_option("--topics", o.synth.topics)->check(CLI::Range(2, 100000));
  synth->add_option("--dim", o.synth.dim)->check(CLI::PositiveNumber);
  synth->add_option("--noise", o.synth.noise)->check(CLI::NonNegativeNumber);
  synth->add_flag("--mixed-types", o.synth.mixed_types);
  add_common(synth, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("qfsum", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::from_str(o.common.log_level));
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  try {
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (label->parsed()) return cmd_label(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (summarize->parsed()) return cmd_summarize(o, out);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    if (crossval->parsed()) return cmd_crossval(o, out);
    if (rl_train->parsed()) return cmd_rl_train(o, out);
    if (rl_eval->parsed()) return cmd_rl_eval(o, out);
    if (rouge->parsed()) return cmd_rouge(o, out);
    if (synth->parsed()) return cmd_synth(o, out);
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace qfsum::cli
