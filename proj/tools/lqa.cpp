// Command-line driver: ingest, index, train, retrieve, answer, evaluate, ablate.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "lqa/corpus.hpp"
#include "lqa/error.hpp"
#include "lqa/metrics.hpp"
#include "lqa/persist.hpp"
#include "lqa/pipeline.hpp"
#include "lqa/strings.hpp"

namespace fs = std::filesystem;
using namespace lqa;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

constexpr const char* kProvenance =
    "Default tags: [reported] = value of the reference configuration, "
    "[chosen] = implementation decision (see docs/cli.md).";

struct Settings {
  // shared
  std::string model_dir = "model";
  std::string config_path;
  std::uint64_t seed = 42;
  std::string test_source;
  double test_fraction = 0.2;
  bool all_cases = false;
  std::vector<std::string> query_ids;

  // ingest
  std::string civil_code;
  std::string queries;
  bool split = true;
  bool expand = false;

  // build-index
  std::size_t lsi_dims = 300;
  std::size_t lda_topics = 300;
  std::size_t lda_iterations = 500;
  double lda_alpha = 0.0;
  double lda_beta = 0.01;
  bool no_lsi = false;
  bool no_lda = false;
  std::string topic_similarity = "cosine";
  std::string lemma_map;
  std::string stopwords;

  // ranker
  std::string features = "LSI_COSINE,MANHATTAN_TF,JACCARD_TFIDF";
  double c = 600.0;
  std::size_t hard_negatives = 50;
  std::size_t random_negatives = 50;
  std::size_t rank_epochs = 200;
  double rank_tolerance = 1e-6;

  // retrieval
  double ratio = 0.85;
  std::size_t top_k = 0;
  std::string question;

  // qa
  std::string embeddings;
  std::size_t filters = 10;
  std::size_t filter_length = 2;
  std::size_t pool = 100;
  std::vector<std::size_t> hidden = {200, 200};
  std::size_t restarts = 10;
  std::size_t qa_epochs = 200;
  double learning_rate = 0.01;
  std::size_t batch_size = 16;
  std::size_t patience = 20;
  double validation_fraction = 0.1;
  double init_scale = 0.05;
  bool no_balance = false;
  std::string aux_lsi = "vector";
  std::string aux_tfidf = "vector";
  std::string aux_sides = "both";

  // answer / evaluate
  std::string scenario = "MAJORITY";
  std::size_t k = 5;
  std::string task = "ir";
  std::string averaging = "micro";

  // ablate
  std::string mode = "loo";
  std::string triples;
  std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};
  double from = 100, to = 2000, step = 100;
  std::string output;
};

std::string artifact(const Settings& s, const char* name) {
  return (fs::path(s.model_dir) / name).string();
}

template <typename F>
auto load_artifact(const std::string& path, const char* producer, F load) {
  if (!fs::exists(path)) {
    throw DataError("missing artifact " + path + " (run `lqa " + producer + "` first)");
  }
  return load(path);
}

CorpusStore load_corpus_artifact(const Settings& s) {
  return load_artifact(artifact(s, "corpus.json"), "ingest", load_corpus);
}
IndexArtifact load_index_artifact(const Settings& s) {
  return load_artifact(artifact(s, "index.json"), "build-index", load_index);
}
RankerArtifact load_ranker_artifact(const Settings& s) {
  return load_artifact(artifact(s, "ranker.json"), "train-ranker", load_ranker);
}
QaArtifact load_qa_artifact(const Settings& s) {
  return load_artifact(artifact(s, "qa.json"), "train-qa", load_qa);
}

void ensure_model_dir(const Settings& s) {
  std::error_code ec;
  fs::create_directories(s.model_dir, ec);
  if (ec) throw DataError("cannot create model directory " + s.model_dir + ": " + ec.message());
}

/// Effective values of every option of `cmd`, for echoing into artifacts.
ConfigEcho echo(const CLI::App& cmd) {
  ConfigEcho out;
  out["command"] = cmd.get_name();
  for (const auto* app : {cmd.get_parent(), &cmd}) {
    if (!app) continue;
    for (const auto* opt : app->get_options()) {
      const auto& name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      std::string value;
      if (opt->count() > 0) {
        value = join(opt->results(), ",");
      } else {
        value = opt->get_default_str();
      }
      out[name] = value;
    }
  }
  return out;
}

std::vector<QueryCase> load_queries(const std::string& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .xml query files in " + path);
  } else {
    files.emplace_back(path);
  }
  std::vector<QueryCase> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    const auto text = read_file(f.string());
    std::vector<QueryCase> cases;
    try {
      cases = parse_query_file(text, f.stem().string());
    } catch (const ParseError& e) {
      throw DataError(f.string() + ": " + e.what());
    }
    for (auto& c : cases) {
      if (!seen.insert(c.id).second) throw DataError("duplicate case id " + c.id + " in " + f.string());
      out.push_back(std::move(c));
    }
  }
  return out;
}

Engine make_engine(const CorpusStore& corpus, IndexArtifact index) {
  return Engine(UnitIndex(corpus.split), std::move(index.models), std::move(index.normalizer));
}

struct CaseSplit {
  std::vector<QueryCase> train;
  std::vector<QueryCase> test;
};

CaseSplit split_for(const std::vector<QueryCase>& cases, const Settings& s) {
  CaseSplit out;
  if (!s.test_source.empty()) {
    for (const auto& c : cases) (c.source == s.test_source ? out.test : out.train).push_back(c);
    if (out.test.empty()) throw DataError("no case comes from source " + s.test_source);
  } else {
    auto [train, test] = split_cases(cases, s.test_fraction, s.seed);
    out.train = std::move(train);
    out.test = std::move(test);
  }
  return out;
}

/// Cases a query command works on: explicit ids, every case, or the held-out part.
std::vector<QueryCase> target_cases(const std::vector<QueryCase>& cases, const Settings& s) {
  if (!s.query_ids.empty()) {
    std::vector<QueryCase> out;
    for (const auto& id : s.query_ids) {
      auto it = std::find_if(cases.begin(), cases.end(), [&](const QueryCase& c) { return c.id == id; });
      if (it == cases.end()) throw DataError("unknown query id " + id);
      out.push_back(*it);
    }
    return out;
  }
  if (s.all_cases) return cases;
  return split_for(cases, s).test;
}

RetrieveOptions retrieve_options(const Settings& s) {
  RetrieveOptions r;
  r.ratio = s.ratio;
  if (s.top_k > 0) r.top_k = s.top_k;
  return r;
}

AuxConfig aux_config(const Settings& s) {
  return AuxConfig{parse_aux_mode(s.aux_lsi), parse_aux_mode(s.aux_tfidf), parse_aux_sides(s.aux_sides)};
}

std::string num(double v) { return fmt::format("{}", v); }

// ---------------------------------------------------------------------------

int run_ingest(const Settings& s, const CLI::App& cmd) {
  const auto articles = parse_civil_code(read_file(s.civil_code));
  CorpusStore store;
  store.articles = articles;
  store.split_paragraphs = s.split;
  store.expand_references = s.expand;
  std::vector<Article> body = articles;
  if (s.expand) {
    const ArticleIndex index(articles);
    for (auto& a : body) a = expand_references(a, index);
  }
  store.split = s.split ? split_articles(body) : whole_articles(body);
  store.cases = load_queries(s.queries);
  store.config = echo(cmd);

  const UnitIndex units(store.split);
  std::size_t unreachable = 0;
  for (const auto& c : store.cases) {
    if (units.relevant_units(c.relevant_ids).empty()) ++unreachable;
  }
  if (unreachable) spdlog::warn("{} case(s) cite no article present in the corpus", unreachable);

  ensure_model_dir(s);
  save_corpus(artifact(s, "corpus.json"), store);
  std::cout << "articles\t" << articles.size() << "\n"
            << "units\t" << store.split.units.size() << "\n"
            << "skipped\t" << store.split.skipped_ids.size() << "\n"
            << "cases\t" << store.cases.size() << "\n";
  return 0;
}

int run_build_index(const Settings& s, const CLI::App& cmd) {
  const auto corpus = load_corpus_artifact(s);
  auto normalizer = NormalizerConfig::english();
  if (!s.lemma_map.empty()) normalizer.lemma_map = load_lemma_map(s.lemma_map);
  if (!s.stopwords.empty()) normalizer.stopwords = load_stopwords(s.stopwords);

  std::vector<TermSequence> terms;
  terms.reserve(corpus.split.units.size());
  for (const auto& u : corpus.split.units) terms.push_back(preprocess(u.text, normalizer));

  IndexOptions opts;
  opts.fit_lsi = !s.no_lsi;
  opts.fit_lda = !s.no_lda;
  opts.lsi.k = s.lsi_dims;
  opts.lsi.seed = s.seed;
  opts.lda.k = s.lda_topics;
  opts.lda.iterations = s.lda_iterations;
  opts.lda.alpha = s.lda_alpha;
  opts.lda.beta = s.lda_beta;
  opts.lda.seed = s.seed;
  if (s.topic_similarity == "hellinger") {
    opts.topic_similarity = TopicSimilarity::Hellinger;
  } else if (s.topic_similarity != "cosine") {
    throw DataError("unknown topic similarity " + s.topic_similarity);
  }

  IndexArtifact index;
  index.normalizer = normalizer;
  index.models = build_index(terms, opts);
  index.config = echo(cmd);
  save_index(artifact(s, "index.json"), index);

  std::cout << "vocabulary\t" << index.models.vocab.size() << "\n"
            << "documents\t" << index.models.vocab.document_count() << "\n"
            << "lsi_k\t" << (index.models.lsi ? index.models.lsi->k() : 0) << "\n"
            << "lda_k\t" << (index.models.lda ? index.models.lda->k : 0) << "\n";
  return 0;
}

int run_train_ranker(const Settings& s, const CLI::App& cmd) {
  const auto corpus = load_corpus_artifact(s);
  const auto engine = make_engine(corpus, load_index_artifact(s));
  const auto kinds = parse_feature_kinds(s.features);
  const auto split = split_for(corpus.cases, s);

  const auto sets = engine.candidates(split.train, kinds);
  const auto pairs = build_pairs(sets, {s.hard_negatives, s.random_negatives, s.seed});
  TrainOptions topts;
  topts.c = s.c;
  topts.seed = s.seed;
  topts.epochs = s.rank_epochs;
  topts.tolerance = s.rank_tolerance;

  RankerArtifact out;
  out.model = train(pairs, kinds, topts);
  out.config = echo(cmd);
  save_ranker(artifact(s, "ranker.json"), out);

  std::cout << "training_cases\t" << split.train.size() << "\n"
            << "pairs\t" << pairs.size() << "\n"
            << "epochs\t" << out.model.epochs_run << "\n"
            << "objective\t" << num(out.model.objective) << "\n";
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::cout << "w\t" << to_string(kinds[i]) << "\t" << num(out.model.w[i]) << "\n";
  }
  return 0;
}

int run_retrieve(const Settings& s, const CLI::App&) {
  const auto corpus = load_corpus_artifact(s);
  const auto engine = make_engine(corpus, load_index_artifact(s));
  const auto ranker = load_ranker_artifact(s);

  std::vector<QueryCase> cases;
  if (!s.question.empty()) {
    QueryCase q;
    q.id = "query";
    q.question = s.question;
    cases.push_back(std::move(q));
  } else {
    cases = target_cases(corpus.cases, s);
  }
  for (const auto& qc : cases) {
    const auto ranked = retrieve(ranker.model, engine.candidates(qc, ranker.model.kinds),
                                 retrieve_options(s));
    for (std::size_t r = 0; r < ranked.entries.size(); ++r) {
      const auto& e = ranked.entries[r];
      std::cout << qc.id << '\t' << r + 1 << '\t' << e.unit_id << '\t' << num(e.score) << '\n';
    }
  }
  return 0;
}

int run_train_qa(const Settings& s, const CLI::App& cmd) {
  const auto corpus = load_corpus_artifact(s);
  const auto engine = make_engine(corpus, load_index_artifact(s));
  const auto table = EmbeddingTable::load(s.embeddings);
  const auto split = split_for(corpus.cases, s);
  const auto aux = aux_config(s);

  std::vector<QaInput> inputs;
  for (const auto& ex : build_qa_examples(engine, split.train)) {
    inputs.push_back(prepare_qa_input(ex, table, aux, engine.models()));
  }

  if (s.hidden.size() != 2) throw DataError("--hidden takes exactly two sizes");
  NetShape shape;
  shape.embedding_dim = table.dim();
  shape.filters = s.filters;
  shape.filter_length = s.filter_length;
  shape.pool = s.pool;
  shape.aux_width = aux_width(aux, engine.models());
  shape.hidden1 = s.hidden[0];
  shape.hidden2 = s.hidden[1];

  QaTrainOptions opts;
  opts.restarts = s.restarts;
  opts.seed = s.seed;
  opts.learning_rate = s.learning_rate;
  opts.batch_size = s.batch_size;
  opts.epochs = s.qa_epochs;
  opts.patience = s.patience;
  opts.validation_fraction = s.validation_fraction;
  opts.init_scale = s.init_scale;
  opts.balance = !s.no_balance;

  auto result = train_qa(inputs, shape, opts);
  QaArtifact out;
  out.net = std::move(result.net);
  out.aux = aux;
  out.options = opts;
  out.restarts = result.restarts;
  out.chosen = result.chosen;
  out.embeddings_path = s.embeddings;
  out.config = echo(cmd);
  save_qa(artifact(s, "qa.json"), out);

  std::cout << "examples\t" << result.train_count << "\t" << result.validation_count << "\n";
  for (std::size_t i = 0; i < result.restarts.size(); ++i) {
    const auto& r = result.restarts[i];
    std::cout << "restart\t" << r.seed << '\t' << num(r.validation_accuracy) << '\t'
              << num(r.training_accuracy) << '\t' << r.best_epoch
              << (i == result.chosen ? "\tchosen" : "") << '\n';
  }
  return 0;
}

struct LoadedQa {
  CorpusStore corpus;
  Engine engine;
  RankerArtifact ranker;
  QaArtifact qa;
  EmbeddingTable table;

  QaSystem system() const { return QaSystem{&engine, &ranker.model, &qa.net, &table, qa.aux}; }
};

LoadedQa load_qa_system(const Settings& s) {
  auto corpus = load_corpus_artifact(s);
  auto engine = make_engine(corpus, load_index_artifact(s));
  auto ranker = load_ranker_artifact(s);
  auto qa = load_qa_artifact(s);
  const auto path = s.embeddings.empty() ? qa.embeddings_path : s.embeddings;
  auto table = EmbeddingTable::load(path);
  if (table.dim() != qa.net.shape().embedding_dim) {
    throw DataError("embeddings in " + path + " have dimension " + std::to_string(table.dim()) +
                    " but the network expects " + std::to_string(qa.net.shape().embedding_dim));
  }
  return LoadedQa{std::move(corpus), std::move(engine), std::move(ranker), std::move(qa),
                  std::move(table)};
}

int run_answer(const Settings& s, const CLI::App&) {
  const auto loaded = load_qa_system(s);
  const auto scenario = parse_voting_scenario(s.scenario);
  for (const auto& qc : target_cases(loaded.corpus.cases, s)) {
    const auto trace = answer(loaded.system(), qc, scenario, s.k);
    std::vector<std::string> votes;
    for (const auto& v : trace.votes) {
      votes.push_back(v.unit_id + ":" + num(v.score) + ":" + std::string(to_string(v.label)));
    }
    std::cout << qc.id << '\t' << to_string(trace.decision.label) << '\t' << to_string(qc.label)
              << '\t' << num(trace.decision.yes_weight) << '\t' << num(trace.decision.no_weight)
              << '\t' << (trace.decision.tie ? "tie" : "-") << '\t' << join(votes, ";") << '\n';
  }
  return 0;
}

int run_evaluate(const Settings& s, const CLI::App&) {
  if (s.task == "ir") {
    const auto corpus = load_corpus_artifact(s);
    const auto engine = make_engine(corpus, load_index_artifact(s));
    const auto ranker = load_ranker_artifact(s);
    GoldArticles gold;
    std::vector<RankedList> ranked;
    for (const auto& qc : target_cases(corpus.cases, s)) {
      gold[qc.id] = qc.relevant_ids;
      ranked.push_back(
          retrieve(ranker.model, engine.candidates(qc, ranker.model.kinds), retrieve_options(s)));
    }
    const auto averaging = s.averaging == "macro" ? Averaging::Macro : Averaging::Micro;
    const auto m = evaluate_ir(ranked, gold, averaging);
    std::cout << "queries\t" << ranked.size() << "\n"
              << "precision\t" << fmt::format("{:.4f}", m.precision) << "\n"
              << "recall\t" << fmt::format("{:.4f}", m.recall) << "\n"
              << "f1\t" << fmt::format("{:.4f}", m.f1) << "\n";
    return 0;
  }
  if (s.task == "qa") {
    const auto loaded = load_qa_system(s);
    const auto scenario = parse_voting_scenario(s.scenario);
    std::map<std::string, Label> predicted, gold;
    for (const auto& qc : target_cases(loaded.corpus.cases, s)) {
      predicted[qc.id] = answer(loaded.system(), qc, scenario, s.k).decision.label;
      gold[qc.id] = qc.label;
    }
    const double acc = evaluate_qa(predicted, gold);
    std::size_t correct = 0;
    for (const auto& [id, label] : predicted) correct += label == gold[id];
    std::cout << "scenario\t" << to_string(scenario) << "\n"
              << "cases\t" << gold.size() << "\n"
              << "correct\t" << correct << "\n"
              << "accuracy\t" << fmt::format("{:.4f}", acc) << "\n";
    return 0;
  }
  throw CLI::ValidationError("--task", "must be ir or qa");
}

int run_ablate(const Settings& s, const CLI::App& cmd) {
  const auto corpus = load_corpus_artifact(s);
  const auto engine = make_engine(corpus, load_index_artifact(s));

  std::vector<std::vector<FeatureKind>> groups;
  std::vector<FeatureKind> base;
  if (s.mode == "loo") {
    base.assign(kAllFeatureKinds.begin(), kAllFeatureKinds.end());
  } else if (s.mode == "triples") {
    groups = s.triples.empty() ? reported_triples() : parse_feature_groups(s.triples);
  } else if (s.mode == "c-sweep") {
    base = parse_feature_kinds(s.features);
  } else {
    throw CLI::ValidationError("--mode", "must be loo, triples or c-sweep");
  }

  std::vector<FeatureKind> needed = base;
  for (const auto& g : groups) {
    for (auto k : g) {
      if (std::find(needed.begin(), needed.end(), k) == needed.end()) needed.push_back(k);
    }
  }

  IrProtocol protocol;
  protocol.sampler = {s.hard_negatives, s.random_negatives, s.seed};
  protocol.train.c = s.c;
  protocol.train.epochs = s.rank_epochs;
  protocol.train.tolerance = s.rank_tolerance;
  protocol.retrieve = retrieve_options(s);
  protocol.test_fraction = s.test_fraction;
  protocol.averaging = s.averaging == "macro" ? Averaging::Macro : Averaging::Micro;
  const IrExperiment experiment(engine.candidates(corpus.cases, needed), needed, protocol);
  const SubsetEvaluator evaluate = [&](std::span<const FeatureKind> kinds, std::uint64_t seed) {
    return experiment.f1(kinds, seed);
  };

  AblationReport report;
  if (s.mode == "loo") {
    report = ablate_leave_one_out(evaluate, base, s.seeds);
  } else if (s.mode == "triples") {
    report = ablate_triples(evaluate, groups, s.seeds);
  } else {
    report = ablate_c_sweep(experiment, base, c_grid(s.from, s.to, s.step), s.seeds);
  }

  const auto tsv = to_tsv(report);
  std::cout << tsv;
  if (!s.output.empty()) {
    std::ofstream(s.output + ".tsv", std::ios::binary) << tsv;
    nlohmann::json j;
    j["mode"] = report.mode;
    j["config"] = echo(cmd);
    j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows) {
      j["rows"].push_back({{"features", r.description},
                           {"kinds", format_feature_kinds(r.kinds)},
                           {"mean", r.mean},
                           {"deviation", r.deviation},
                           {"summary", r.formatted()},
                           {"values", r.values}});
    }
    std::ofstream out(s.output + ".json", std::ios::binary);
    out << j.dump(1) << "\n";
    if (!out) throw DataError("cannot write " + s.output + ".json");
  }
  return 0;
}

// ---------------------------------------------------------------------------

void add_split_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--test-source", s.test_source,
                  "Hold out the cases of this query file (by stem) instead of a random split [chosen]");
  cmd->add_option("--test-fraction", s.test_fraction, "Fraction of cases held out by the seeded split [reported]")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", s.seed, "Seed for splits, sampling and training [chosen]")->capture_default_str();
}

void add_target_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--query-id", s.query_ids, "Case id to process; repeatable (default: held-out cases)")
      ->delimiter(',');
  cmd->add_flag("--all", s.all_cases, "Process every case instead of the held-out ones");
}

void add_retrieve_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--ratio", s.ratio, "Keep units scoring at least this fraction of the best score [reported]")
      ->capture_default_str();
  cmd->add_option("--top-k", s.top_k, "Return exactly the k best units; 0 uses --ratio [chosen]")
      ->capture_default_str();
}

void add_sampler_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--c", s.c, "Ranking SVM trade-off C [reported]")->capture_default_str();
  cmd->add_option("--hard-negatives", s.hard_negatives,
                  "Non-relevant units per query taken by tf-idf cosine [chosen]")
      ->capture_default_str();
  cmd->add_option("--random-negatives", s.random_negatives,
                  "Additional non-relevant units drawn at random [chosen]")
      ->capture_default_str();
  cmd->add_option("--rank-epochs", s.rank_epochs, "Maximum ranker training epochs [chosen]")
      ->capture_default_str();
  cmd->add_option("--rank-tolerance", s.rank_tolerance, "Ranker convergence tolerance [chosen]")
      ->capture_default_str();
}

void add_voting_options(CLI::App* cmd, Settings& s) {
  cmd->add_option("--scenario", s.scenario, "NO_VOTING, MAJORITY or RATIO [reported]")->capture_default_str();
  cmd->add_option("--k", s.k, "Units retrieved per question for voting [reported]")->capture_default_str();
  cmd->add_option("--embeddings", s.embeddings, "Override the embedding file recorded at training");
}

/// Command-line arguments extended with the key=value lines of the config
/// file named by --config. Keys already given on the command line, and keys
/// the chosen command does not know, are left out.
std::vector<std::string> with_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  CLI::App* cmd = nullptr;
  for (const auto& a : args) {
    if ((cmd = app.get_subcommand_no_throw(a))) break;
  }
  if (!cmd) return args;

  auto given = [&](const CLI::Option* opt) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      if (!a.starts_with("--")) return false;
      const auto name = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
      return opt->check_lname(name);
    });
  };

  const auto text = read_file(path);
  std::vector<std::string> extra;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(path + ": expected key=value", line_no);
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt || given(opt) || key == "config") continue;
    extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Statute retrieval and yes/no question answering over a civil code."};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(kProvenance);
  app.add_option("--model-dir", s.model_dir, "Directory holding the artifacts")->capture_default_str();
  app.add_option("--config", s.config_path, "key=value file; command-line flags take precedence");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Parse the civil code and query files into the corpus store");
  ingest->add_option("--civil-code", s.civil_code, "Civil code text file")->required();
  ingest->add_option("--queries", s.queries, "Query XML file or directory of .xml files")->required();
  ingest->add_flag("--split,!--no-split", s.split, "Split multi-paragraph articles into paragraph units [reported]")
      ->capture_default_str();
  ingest->add_flag("--expand-references,!--no-expand-references", s.expand,
                   "Append the text of cited articles to each paragraph [reported]")
      ->capture_default_str();

  auto* index = app.add_subcommand("build-index", "Fit vocabulary, TF-IDF, LSI and LDA on the corpus units");
  index->add_option("--lsi-dims", s.lsi_dims, "LSI dimensions [chosen]")->capture_default_str();
  index->add_option("--lda-topics", s.lda_topics, "LDA topics [chosen]")->capture_default_str();
  index->add_option("--lda-iterations", s.lda_iterations, "Gibbs sweeps [chosen]")->capture_default_str();
  index->add_option("--lda-alpha", s.lda_alpha, "Document-topic prior; 0 selects 50/topics [chosen]")
      ->capture_default_str();
  index->add_option("--lda-beta", s.lda_beta, "Topic-word prior [chosen]")->capture_default_str();
  index->add_flag("--no-lsi", s.no_lsi, "Skip the LSI model");
  index->add_flag("--no-lda", s.no_lda, "Skip the LDA model");
  index->add_option("--topic-similarity", s.topic_similarity, "cosine or hellinger for LDA_COSINE [chosen]")
      ->capture_default_str();
  index->add_option("--lemma-map", s.lemma_map, "Two-column word/lemma file replacing the built-in table");
  index->add_option("--stopwords", s.stopwords, "Stopword file replacing the built-in list");
  index->add_option("--seed", s.seed, "Seed for LSI and LDA [chosen]")->capture_default_str();

  auto* ranker = app.add_subcommand("train-ranker", "Train the Ranking SVM on the training cases");
  ranker->add_option("--features", s.features, "Comma-separated feature kinds [reported]")->capture_default_str();
  add_sampler_options(ranker, s);
  add_split_options(ranker, s);

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Print ranked units: query id, rank, unit id, score");
  add_target_options(retrieve_cmd, s);
  retrieve_cmd->add_option("--question", s.question, "Rank units for this free-text question");
  add_retrieve_options(retrieve_cmd, s);
  add_split_options(retrieve_cmd, s);

  auto* qa = app.add_subcommand("train-qa", "Train the entailment network on the training cases");
  qa->add_option("--embeddings", s.embeddings, "Word vectors in word2vec text format")->required();
  qa->add_option("--filters", s.filters, "Convolution filters [reported]")->capture_default_str();
  qa->add_option("--filter-length", s.filter_length, "Filter length [reported]")->capture_default_str();
  qa->add_option("--pool", s.pool, "Average-pooling window [reported]")->capture_default_str();
  qa->add_option("--hidden", s.hidden, "Two hidden layer sizes [reported]")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  qa->add_option("--restarts", s.restarts, "Random restarts [reported]")->capture_default_str();
  qa->add_option("--epochs", s.qa_epochs, "Maximum epochs per restart [chosen]")->capture_default_str();
  qa->add_option("--learning-rate", s.learning_rate, "Minibatch gradient step [chosen]")->capture_default_str();
  qa->add_option("--batch-size", s.batch_size, "Minibatch size [chosen]")->capture_default_str();
  qa->add_option("--patience", s.patience, "Epochs without validation gain before stopping [chosen]")
      ->capture_default_str();
  qa->add_option("--validation-fraction", s.validation_fraction, "Held-out share of training examples [chosen]")
      ->capture_default_str();
  qa->add_option("--init-scale", s.init_scale, "Uniform initialisation half-width [chosen]")->capture_default_str();
  qa->add_flag("--no-balance", s.no_balance, "Keep the label imbalance instead of downsampling [chosen]");
  qa->add_option("--aux-lsi", s.aux_lsi, "LSI auxiliary features: none, scalar or vector [reported]")
      ->capture_default_str();
  qa->add_option("--aux-tfidf", s.aux_tfidf, "TF-IDF auxiliary features: none, scalar or vector [reported]")
      ->capture_default_str();
  qa->add_option("--aux-sides", s.aux_sides, "Vectors appended in vector mode: both, question or article [chosen]")
      ->capture_default_str();
  add_split_options(qa, s);

  auto* answer_cmd = app.add_subcommand("answer", "Answer cases: id, answer, gold, yes weight, no weight, tie, votes");
  add_target_options(answer_cmd, s);
  add_voting_options(answer_cmd, s);
  add_split_options(answer_cmd, s);

  auto* evaluate = app.add_subcommand("evaluate", "IR precision/recall/F1 or QA accuracy on held-out cases");
  evaluate->add_option("--task", s.task, "ir or qa")->capture_default_str()->check(CLI::IsMember({"ir", "qa"}));
  evaluate->add_option("--averaging", s.averaging, "micro or macro IR averaging [chosen]")
      ->capture_default_str()
      ->check(CLI::IsMember({"micro", "macro"}));
  add_target_options(evaluate, s);
  add_retrieve_options(evaluate, s);
  add_voting_options(evaluate, s);
  add_split_options(evaluate, s);

  auto* ablate = app.add_subcommand("ablate", "Feature ablations and C sweep over repeated seeded splits");
  ablate->add_option("--mode", s.mode, "loo, triples or c-sweep")
      ->capture_default_str()
      ->check(CLI::IsMember({"loo", "triples", "c-sweep"}));
  ablate->add_option("--triples", s.triples, "Feature groups, ';' between groups, ',' within (default: the four reported triples)");
  ablate->add_option("--features", s.features, "Feature kinds for c-sweep [reported]")->capture_default_str();
  ablate->add_option("--seeds", s.seeds, "Split seeds, one F1 per seed [chosen]")->delimiter(',')->capture_default_str();
  ablate->add_option("--from", s.from, "First C of the sweep [reported]")->capture_default_str();
  ablate->add_option("--to", s.to, "Last C of the sweep [reported]")->capture_default_str();
  ablate->add_option("--step", s.step, "C step [reported]")->capture_default_str();
  ablate->add_option("--averaging", s.averaging, "micro or macro IR averaging [chosen]")
      ->capture_default_str()
      ->check(CLI::IsMember({"micro", "macro"}));
  ablate->add_option("--output", s.output, "Also write PREFIX.tsv and PREFIX.json");
  add_retrieve_options(ablate, s);
  add_sampler_options(ablate, s);
  ablate->add_option("--test-fraction", s.test_fraction, "Fraction of cases held out per seed [reported]")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  for (auto* sub : app.get_subcommands({})) sub->footer(kProvenance);

  try {
    auto args = with_config(app, std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
    spdlog::set_level(spdlog::level::from_str(log_level));
    auto* cmd = app.get_subcommands().front();

    const auto& name = cmd->get_name();
    if (name == "ingest") return run_ingest(s, *cmd);
    if (name == "build-index") return run_build_index(s, *cmd);
    if (name == "train-ranker") return run_train_ranker(s, *cmd);
    if (name == "retrieve") return run_retrieve(s, *cmd);
    if (name == "train-qa") return run_train_qa(s, *cmd);
    if (name == "answer") return run_answer(s, *cmd);
    if (name == "evaluate") return run_evaluate(s, *cmd);
    return run_ablate(s, *cmd);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
