#include "lqa/persist.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "lqa/error.hpp"
#include "lqa/strings.hpp"

namespace lqa {

using nlohmann::json;

namespace {

json header(std::string_view format, const ConfigEcho& config) {
  json j;
  j["format"] = format;
  j["config"] = config;
  return j;
}

json parse_checked(std::string_view text, std::string_view expected) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed artifact: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format") || !j["format"].is_string()) {
    throw VersionError("artifact has no format version (expected " + std::string(expected) + ")");
  }
  const auto found = j["format"].get<std::string>();
  if (found != expected) {
    throw VersionError("artifact format " + found + " does not match expected " +
                       std::string(expected));
  }
  return j;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed artifact: ") + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("cannot write " + path);
}

std::string read_artifact(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw DataError("missing artifact: " + path);
  return read_file(path);
}

json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || flat.size() != static_cast<std::size_t>(rows * cols)) {
    throw DataError("matrix size does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

json kinds_json(std::span<const FeatureKind> kinds) {
  json a = json::array();
  for (auto k : kinds) a.push_back(to_string(k));
  return a;
}

std::vector<FeatureKind> kinds_from(const json& j) {
  std::vector<FeatureKind> out;
  for (const auto& k : j) out.push_back(parse_feature_kind(k.get<std::string>()));
  return out;
}

json normalizer_json(const NormalizerConfig& n) {
  std::map<std::string, std::string> lemmas(n.lemma_map.begin(), n.lemma_map.end());
  std::vector<std::string> stop(n.stopwords.begin(), n.stopwords.end());
  std::sort(stop.begin(), stop.end());
  json rules = json::array();
  for (const auto& r : n.suffix_rules) rules.push_back({r.suffix, r.replacement});
  return json{{"lemma_map", lemmas}, {"suffix_rules", rules}, {"stopwords", stop},
              {"min_stem", n.min_stem}};
}

NormalizerConfig normalizer_from(const json& j) {
  NormalizerConfig n;
  for (const auto& [k, v] : j.at("lemma_map").items()) n.lemma_map.emplace(k, v.get<std::string>());
  for (const auto& r : j.at("suffix_rules")) {
    n.suffix_rules.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>()});
  }
  for (const auto& s : j.at("stopwords")) n.stopwords.insert(s.get<std::string>());
  n.min_stem = j.at("min_stem").get<std::size_t>();
  return n;
}

json article_json(const Article& a) {
  return json{{"id", a.id}, {"paragraphs", a.paragraphs}, {"raw_text", a.raw_text}};
}

json unit_json(const ParagraphUnit& u) {
  return json{{"id", u.id}, {"parent_id", u.parent_id}, {"index", u.index}, {"text", u.text}};
}

json case_json(const QueryCase& c) {
  return json{{"id", c.id},
              {"question", c.question},
              {"relevant_ids", c.relevant_ids},
              {"label", to_string(c.label)},
              {"source", c.source}};
}

}  // namespace

std::string dump_corpus(const CorpusStore& store) {
  json j = header(kCorpusFormat, store.config);
  j["split_paragraphs"] = store.split_paragraphs;
  j["expand_references"] = store.expand_references;
  j["articles"] = json::array();
  for (const auto& a : store.articles) j["articles"].push_back(article_json(a));
  j["units"] = json::array();
  for (const auto& u : store.split.units) j["units"].push_back(unit_json(u));
  j["skipped_ids"] = store.split.skipped_ids;
  j["cases"] = json::array();
  for (const auto& c : store.cases) j["cases"].push_back(case_json(c));
  return j.dump(1) + "\n";
}

CorpusStore parse_corpus(std::string_view text) {
  const auto j = parse_checked(text, kCorpusFormat);
  return guarded([&] {
    CorpusStore s;
    s.config = j.at("config").get<ConfigEcho>();
    s.split_paragraphs = j.at("split_paragraphs").get<bool>();
    s.expand_references = j.at("expand_references").get<bool>();
    for (const auto& a : j.at("articles")) {
      s.articles.push_back({a.at("id").get<std::string>(),
                            a.at("paragraphs").get<std::vector<std::string>>(),
                            a.at("raw_text").get<std::string>()});
    }
    for (const auto& u : j.at("units")) {
      s.split.units.push_back({u.at("id").get<std::string>(), u.at("parent_id").get<std::string>(),
                               u.at("index").get<int>(), u.at("text").get<std::string>()});
    }
    s.split.skipped_ids = j.at("skipped_ids").get<std::vector<std::string>>();
    for (const auto& c : j.at("cases")) {
      QueryCase qc;
      qc.id = c.at("id").get<std::string>();
      qc.question = c.at("question").get<std::string>();
      qc.relevant_ids = c.at("relevant_ids").get<std::vector<std::string>>();
      qc.label = parse_label(c.at("label").get<std::string>());
      qc.source = c.at("source").get<std::string>();
      s.cases.push_back(std::move(qc));
    }
    return s;
  });
}

std::string dump_index(const IndexArtifact& index) {
  const auto& m = index.models;
  json j = header(kIndexFormat, index.config);
  j["normalizer"] = normalizer_json(index.normalizer);
  std::vector<std::string> terms(m.vocab.terms().begin(), m.vocab.terms().end());
  std::vector<std::uint32_t> df(m.vocab.dfs().begin(), m.vocab.dfs().end());
  j["vocabulary"] = {{"document_count", m.vocab.document_count()}, {"terms", terms}, {"df", df}};
  j["topic_similarity"] = m.topic_similarity == TopicSimilarity::Cosine ? "cosine" : "hellinger";
  if (m.lsi) {
    const auto& l = *m.lsi;
    std::vector<double> sv(l.singular_values.data(),
                           l.singular_values.data() + l.singular_values.size());
    j["lsi"] = {{"weighting", to_string(l.weighting)},
                {"k", l.options.k},
                {"seed", l.options.seed},
                {"oversampling", l.options.oversampling},
                {"power_iterations", l.options.power_iterations},
                {"singular_values", sv},
                {"projection", matrix_json(l.projection)}};
  } else {
    j["lsi"] = nullptr;
  }
  if (m.lda) {
    const auto& l = *m.lda;
    j["lda"] = {{"k", l.k},
                {"alpha", l.alpha},
                {"beta", l.beta},
                {"iterations", l.iterations},
                {"inference_iterations", l.inference_iterations},
                {"seed", l.seed},
                {"topic_term", matrix_json(l.topic_term)}};
  } else {
    j["lda"] = nullptr;
  }
  return j.dump(1) + "\n";
}

IndexArtifact parse_index(std::string_view text) {
  const auto j = parse_checked(text, kIndexFormat);
  return guarded([&] {
    IndexArtifact a;
    a.config = j.at("config").get<ConfigEcho>();
    a.normalizer = normalizer_from(j.at("normalizer"));
    const auto& v = j.at("vocabulary");
    a.models.vocab = Vocabulary(v.at("terms").get<std::vector<std::string>>(),
                                v.at("df").get<std::vector<std::uint32_t>>(),
                                v.at("document_count").get<std::size_t>());
    a.models.topic_similarity = j.at("topic_similarity").get<std::string>() == "hellinger"
                                    ? TopicSimilarity::Hellinger
                                    : TopicSimilarity::Cosine;
    if (const auto& l = j.at("lsi"); !l.is_null()) {
      LsiModel m;
      m.weighting = parse_weighting(l.at("weighting").get<std::string>());
      m.options.weighting = m.weighting;
      m.options.k = l.at("k").get<std::size_t>();
      m.options.seed = l.at("seed").get<std::uint64_t>();
      m.options.oversampling = l.at("oversampling").get<std::size_t>();
      m.options.power_iterations = l.at("power_iterations").get<std::size_t>();
      const auto sv = l.at("singular_values").get<std::vector<double>>();
      m.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
      m.projection = matrix_from(l.at("projection"));
      if (m.dim() != a.models.vocab.size() || m.k() != sv.size()) {
        throw DataError("LSI projection does not match the vocabulary");
      }
      a.models.lsi = std::move(m);
    }
    if (const auto& l = j.at("lda"); !l.is_null()) {
      LdaModel m;
      m.k = l.at("k").get<std::size_t>();
      m.alpha = l.at("alpha").get<double>();
      m.beta = l.at("beta").get<double>();
      m.iterations = l.at("iterations").get<std::size_t>();
      m.inference_iterations = l.at("inference_iterations").get<std::size_t>();
      m.seed = l.at("seed").get<std::uint64_t>();
      m.topic_term = matrix_from(l.at("topic_term"));
      if (m.dim() != a.models.vocab.size() || static_cast<std::size_t>(m.topic_term.rows()) != m.k) {
        throw DataError("LDA topic-term matrix does not match the vocabulary");
      }
      a.models.lda = std::move(m);
    }
    return a;
  });
}

std::string dump_ranker(const RankerArtifact& ranker) {
  const auto& m = ranker.model;
  json j = header(kRankerFormat, ranker.config);
  j["kinds"] = kinds_json(m.kinds);
  j["w"] = m.w;
  j["c"] = m.c;
  j["seed"] = m.seed;
  j["max_epochs"] = m.max_epochs;
  j["epochs_run"] = m.epochs_run;
  j["tolerance"] = m.tolerance;
  j["training_loss"] = m.training_loss;
  j["objective"] = m.objective;
  j["objective_history"] = m.objective_history;
  if (m.scaler) {
    j["scaler"] = {{"min", m.scaler->min}, {"max", m.scaler->max}};
  } else {
    j["scaler"] = nullptr;
  }
  return j.dump(1) + "\n";
}

RankerArtifact parse_ranker(std::string_view text) {
  const auto j = parse_checked(text, kRankerFormat);
  return guarded([&] {
    RankerArtifact a;
    a.config = j.at("config").get<ConfigEcho>();
    auto& m = a.model;
    m.kinds = kinds_from(j.at("kinds"));
    m.w = j.at("w").get<std::vector<double>>();
    m.c = j.at("c").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.max_epochs = j.at("max_epochs").get<std::size_t>();
    m.epochs_run = j.at("epochs_run").get<std::size_t>();
    m.tolerance = j.at("tolerance").get<double>();
    m.training_loss = j.at("training_loss").get<double>();
    m.objective = j.at("objective").get<double>();
    m.objective_history = j.at("objective_history").get<std::vector<double>>();
    if (const auto& s = j.at("scaler"); !s.is_null()) {
      m.scaler = MinMaxScaler{s.at("min").get<std::vector<double>>(),
                              s.at("max").get<std::vector<double>>()};
      if (m.scaler->min.size() != m.w.size() || m.scaler->max.size() != m.w.size()) {
        throw DataError("scaler width does not match the weight vector");
      }
    }
    if (m.w.size() != m.kinds.size()) throw DataError("weight vector does not match the kinds");
    return a;
  });
}

std::string dump_qa(const QaArtifact& qa) {
  const auto& s = qa.net.shape();
  json j = header(kQaFormat, qa.config);
  j["shape"] = {{"embedding_dim", s.embedding_dim}, {"filters", s.filters},
                {"filter_length", s.filter_length}, {"pool", s.pool},
                {"aux_width", s.aux_width},         {"hidden1", s.hidden1},
                {"hidden2", s.hidden2}};
  json params;
  const auto blocks = qa.net.params().blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    params[std::string(NetParams::kBlockNames[i])] =
        std::vector<double>(blocks[i].begin(), blocks[i].end());
  }
  j["params"] = params;
  j["aux"] = {{"lsi", to_string(qa.aux.lsi)},
              {"tfidf", to_string(qa.aux.tfidf)},
              {"sides", to_string(qa.aux.sides)}};
  const auto& o = qa.options;
  j["options"] = {{"restarts", o.restarts},
                  {"seed", o.seed},
                  {"learning_rate", o.learning_rate},
                  {"batch_size", o.batch_size},
                  {"epochs", o.epochs},
                  {"patience", o.patience},
                  {"validation_fraction", o.validation_fraction},
                  {"init_scale", o.init_scale},
                  {"balance", o.balance}};
  j["restarts"] = json::array();
  for (const auto& r : qa.restarts) {
    j["restarts"].push_back({{"seed", r.seed},
                             {"validation_accuracy", r.validation_accuracy},
                             {"training_accuracy", r.training_accuracy},
                             {"epochs_run", r.epochs_run},
                             {"best_epoch", r.best_epoch}});
  }
  j["chosen"] = qa.chosen;
  j["embeddings_path"] = qa.embeddings_path;
  return j.dump(1) + "\n";
}

QaArtifact parse_qa(std::string_view text) {
  const auto j = parse_checked(text, kQaFormat);
  return guarded([&] {
    QaArtifact a;
    a.config = j.at("config").get<ConfigEcho>();
    const auto& s = j.at("shape");
    NetShape shape;
    shape.embedding_dim = s.at("embedding_dim").get<std::size_t>();
    shape.filters = s.at("filters").get<std::size_t>();
    shape.filter_length = s.at("filter_length").get<std::size_t>();
    shape.pool = s.at("pool").get<std::size_t>();
    shape.aux_width = s.at("aux_width").get<std::size_t>();
    shape.hidden1 = s.at("hidden1").get<std::size_t>();
    shape.hidden2 = s.at("hidden2").get<std::size_t>();
    a.net = EntailmentNet(shape);
    auto blocks = a.net.params().blocks();
    const auto& params = j.at("params");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto name = std::string(NetParams::kBlockNames[i]);
      const auto values = params.at(name).get<std::vector<double>>();
      if (values.size() != blocks[i].size()) {
        throw DataError("parameter block " + name + " does not match the network shape");
      }
      std::copy(values.begin(), values.end(), blocks[i].begin());
    }
    const auto& x = j.at("aux");
    a.aux.lsi = parse_aux_mode(x.at("lsi").get<std::string>());
    a.aux.tfidf = parse_aux_mode(x.at("tfidf").get<std::string>());
    a.aux.sides = parse_aux_sides(x.at("sides").get<std::string>());
    const auto& o = j.at("options");
    a.options.restarts = o.at("restarts").get<std::size_t>();
    a.options.seed = o.at("seed").get<std::uint64_t>();
    a.options.learning_rate = o.at("learning_rate").get<double>();
    a.options.batch_size = o.at("batch_size").get<std::size_t>();
    a.options.epochs = o.at("epochs").get<std::size_t>();
    a.options.patience = o.at("patience").get<std::size_t>();
    a.options.validation_fraction = o.at("validation_fraction").get<double>();
    a.options.init_scale = o.at("init_scale").get<double>();
    a.options.balance = o.at("balance").get<bool>();
    for (const auto& r : j.at("restarts")) {
      a.restarts.push_back({r.at("seed").get<std::uint64_t>(),
                            r.at("validation_accuracy").get<double>(),
                            r.at("training_accuracy").get<double>(),
                            r.at("epochs_run").get<std::size_t>(),
                            r.at("best_epoch").get<std::size_t>()});
    }
    a.chosen = j.at("chosen").get<std::size_t>();
    a.embeddings_path = j.at("embeddings_path").get<std::string>();
    return a;
  });
}

void save_corpus(const std::string& path, const CorpusStore& store) {
  write_text(path, dump_corpus(store));
}
CorpusStore load_corpus(const std::string& path) { return parse_corpus(read_artifact(path)); }

void save_index(const std::string& path, const IndexArtifact& index) {
  write_text(path, dump_index(index));
}
IndexArtifact load_index(const std::string& path) { return parse_index(read_artifact(path)); }

void save_ranker(const std::string& path, const RankerArtifact& ranker) {
  write_text(path, dump_ranker(ranker));
}
RankerArtifact load_ranker(const std::string& path) { return parse_ranker(read_artifact(path)); }

void save_qa(const std::string& path, const QaArtifact& qa) { write_text(path, dump_qa(qa)); }
QaArtifact load_qa(const std::string& path) { return parse_qa(read_artifact(path)); }

}  // namespace lqa
