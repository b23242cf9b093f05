#include "lqa/entailment.hpp"

#include <algorithm>
#include <cctype>
#include <utility>
#include <cmath>
#include <sstream>

#include "lqa/error.hpp"
#include "lqa/random.hpp"
#include "lqa/strings.hpp"

namespace lqa {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_len(std::string_view what, std::size_t got, std::size_t want) {
  if (got != want) {
    throw DataError(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                    std::to_string(want));
  }
}

}  // namespace

EmbeddingTable EmbeddingTable::parse(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t line_no = 0;
  std::size_t count = 0, dim = 0;
  bool header = false;
  EmbeddingTable table;
  for (auto line : lines) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream in{std::string(line)};
    if (!header) {
      if (!(in >> count >> dim) || dim == 0) throw ParseError("expected 'count dim' header", line_no);
      table = EmbeddingTable(dim);
      header = true;
      continue;
    }
    std::string word;
    in >> word;
    std::vector<double> vec;
    vec.reserve(dim);
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t used = 0;
        vec.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("'" + tok + "' is not a number", line_no);
      }
    }
    if (vec.size() != dim) {
      throw ParseError("expected " + std::to_string(dim) + " values for '" + word + "', got " +
                           std::to_string(vec.size()),
                       line_no);
    }
    if (table.size() == count) throw ParseError("more vectors than the header count", line_no);
    table.add(std::move(word), std::move(vec));
  }
  if (!header) throw ParseError("empty embedding file");
  if (table.size() != count) {
    throw ParseError("header promises " + std::to_string(count) + " vectors, found " +
                     std::to_string(table.size()));
  }
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void EmbeddingTable::add(std::string word, std::vector<double> vec) {
  check_len("embedding for '" + word + "'", vec.size(), dim_);
  vectors_[std::move(word)] = std::move(vec);
}

bool EmbeddingTable::contains(std::string_view word) const {
  return vectors_.contains(std::string(word));
}

std::span<const double> EmbeddingTable::lookup(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? std::span<const double>(zero_) : std::span<const double>(it->second);
}

std::vector<double> bow_vector(const TermSequence& terms, const EmbeddingTable& table) {
  std::vector<double> out(table.dim(), 0.0);
  if (terms.empty()) return out;
  for (const auto& t : terms) {
    const auto v = table.lookup(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const double n = static_cast<double>(terms.size());
  for (auto& x : out) x /= n;
  return out;
}

std::vector<double> interleave(std::span<const double> question, std::span<const double> article) {
  check_len("article vector", article.size(), question.size());
  std::vector<double> out(2 * question.size());
  for (std::size_t i = 0; i < question.size(); ++i) {
    out[2 * i] = question[i];
    out[2 * i + 1] = article[i];
  }
  return out;
}

std::vector<double> convolve(std::span<const double> input, std::span<const double> filter) {
  if (filter.empty() || filter.size() > input.size()) {
    throw DataError("filter length " + std::to_string(filter.size()) +
                    " does not fit input length " + std::to_string(input.size()));
  }
  std::vector<double> out(input.size() - filter.size() + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < filter.size(); ++j) s += filter[j] * input[i + j];
    out[i] = s;
  }
  return out;
}

std::vector<double> avg_pool(std::span<const double> map, std::size_t window) {
  if (window == 0) throw DataError("pooling window must be at least 1");
  std::vector<double> out;
  out.reserve((map.size() + window - 1) / window);
  for (std::size_t start = 0; start < map.size(); start += window) {
    const std::size_t end = std::min(start + window, map.size());
    double s = 0.0;
    for (std::size_t i = start; i < end; ++i) s += map[i];
    out.push_back(s / static_cast<double>(end - start));
  }
  return out;
}

std::string_view to_string(AuxMode mode) {
  switch (mode) {
    case AuxMode::None: return "none";
    case AuxMode::Scalar: return "scalar";
    case AuxMode::Vector: return "vector";
  }
  return "?";
}

AuxMode parse_aux_mode(std::string_view s) {
  const auto v = to_lower(trim(s));
  if (v == "none") return AuxMode::None;
  if (v == "scalar") return AuxMode::Scalar;
  if (v == "vector") return AuxMode::Vector;
  throw DataError("unknown auxiliary mode '" + std::string(s) + "'");
}

std::string_view to_string(AuxSides sides) {
  switch (sides) {
    case AuxSides::Both: return "both";
    case AuxSides::Question: return "question";
    case AuxSides::Article: return "article";
  }
  return "?";
}

AuxSides parse_aux_sides(std::string_view s) {
  const auto v = to_lower(trim(s));
  if (v == "both") return AuxSides::Both;
  if (v == "question") return AuxSides::Question;
  if (v == "article") return AuxSides::Article;
  throw DataError("unknown auxiliary side selection '" + std::string(s) + "'");
}

std::size_t aux_width(const AuxConfig& config, const IndexModels& models) {
  const std::size_t sides = config.sides == AuxSides::Both ? 2 : 1;
  std::size_t w = 0;
  if (config.lsi != AuxMode::None && !models.lsi) {
    throw DataError("LSI auxiliary features need a fitted LSI model");
  }
  if (config.lsi == AuxMode::Scalar) w += 1;
  if (config.lsi == AuxMode::Vector) w += sides * models.lsi->k();
  if (config.tfidf == AuxMode::Scalar) w += 1;
  if (config.tfidf == AuxMode::Vector) w += sides * models.vocab.size();
  return w;
}

std::vector<double> auxiliary_features(const TermSequence& question, const TermSequence& article,
                                       const AuxConfig& config, const IndexModels& models) {
  std::vector<double> out;
  out.reserve(aux_width(config, models));
  auto append_pair = [&](const std::vector<double>& q, const std::vector<double>& a) {
    if (config.sides != AuxSides::Article) out.insert(out.end(), q.begin(), q.end());
    if (config.sides != AuxSides::Question) out.insert(out.end(), a.begin(), a.end());
  };

  if (config.lsi != AuxMode::None) {
    if (!models.lsi) throw DataError("LSI auxiliary features need a fitted LSI model");
    const auto& lsi = *models.lsi;
    const auto q = project_lsi(weigh(question, models.vocab, lsi.weighting), lsi);
    const auto a = project_lsi(weigh(article, models.vocab, lsi.weighting), lsi);
    if (config.lsi == AuxMode::Scalar) {
      out.push_back(cosine(q, a));
    } else {
      append_pair(q, a);
    }
  }
  if (config.tfidf != AuxMode::None) {
    const auto q = tfidf_vector(question, models.vocab);
    const auto a = tfidf_vector(article, models.vocab);
    if (config.tfidf == AuxMode::Scalar) {
      out.push_back(cosine(q, a));
    } else {
      append_pair(q.to_dense(models.vocab.size()), a.to_dense(models.vocab.size()));
    }
  }
  return out;
}

std::string select_article_sentence(std::string_view unit_text, const TermSequence& question,
                                    const Vocabulary& vocab, const NormalizerConfig& normalizer) {
  std::vector<std::string_view> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= unit_text.size(); ++i) {
    if (i < unit_text.size() && std::string_view(".;?!").find(unit_text[i]) == std::string_view::npos) {
      continue;
    }
    const auto piece = trim(unit_text.substr(start, std::min(i + 1, unit_text.size()) - start));
    if (std::any_of(piece.begin(), piece.end(),
                    [](unsigned char c) { return std::isalnum(c) || c >= 0x80; })) {
      sentences.push_back(piece);
    }
    start = i + 1;
  }
  if (sentences.size() <= 1) return std::string(trim(unit_text));

  const auto q = tfidf_vector(question, vocab);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const double s = cosine(q, tfidf_vector(preprocess(sentences[i], normalizer), vocab));
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return std::string(sentences[best]);
}

NetParams NetParams::zeros(const NetShape& s) {
  NetParams p;
  p.filters.assign(s.filters * s.filter_length, 0.0);
  p.w1.assign(s.hidden1 * s.hidden_input(), 0.0);
  p.b1.assign(s.hidden1, 0.0);
  p.w2.assign(s.hidden2 * s.hidden1, 0.0);
  p.b2.assign(s.hidden2, 0.0);
  p.w3.assign(s.hidden2, 0.0);
  p.b3.assign(1, 0.0);
  return p;
}

std::vector<std::span<double>> NetParams::blocks() {
  return {filters, w1, b1, w2, b2, w3, b3};
}

std::vector<std::span<const double>> NetParams::blocks() const {
  return {filters, w1, b1, w2, b2, w3, b3};
}

EntailmentNet::EntailmentNet(NetShape shape) : shape_(shape), params_(NetParams::zeros(shape)) {
  if (shape.embedding_dim == 0 || shape.filters == 0 || shape.filter_length == 0 ||
      shape.pool == 0 || shape.hidden1 == 0 || shape.hidden2 == 0) {
    throw DataError("network dimensions must be positive");
  }
  if (shape.filter_length > shape.input_length()) {
    throw DataError("filter length exceeds the input length");
  }
}

void EntailmentNet::init_uniform(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto block : params_.blocks()) {
    for (auto& x : block) x = rng.uniform(-scale, scale);
  }
}

ForwardTrace EntailmentNet::trace(std::span<const double> input, std::span<const double> aux) const {
  const auto& s = shape_;
  check_len("network input", input.size(), s.input_length());
  check_len("auxiliary input", aux.size(), s.aux_width);

  ForwardTrace t;
  t.hidden_input.reserve(s.hidden_input());
  t.maps.reserve(s.filters);
  for (std::size_t f = 0; f < s.filters; ++f) {
    const std::span<const double> filter(params_.filters.data() + f * s.filter_length,
                                         s.filter_length);
    t.maps.push_back(convolve(input, filter));
    const auto pooled = avg_pool(t.maps.back(), s.pool);
    t.hidden_input.insert(t.hidden_input.end(), pooled.begin(), pooled.end());
  }
  t.hidden_input.insert(t.hidden_input.end(), aux.begin(), aux.end());

  const std::size_t in = s.hidden_input();
  t.h1.resize(s.hidden1);
  for (std::size_t i = 0; i < s.hidden1; ++i) {
    double z = params_.b1[i];
    const double* row = params_.w1.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) z += row[j] * t.hidden_input[j];
    t.h1[i] = sigmoid(z);
  }
  t.h2.resize(s.hidden2);
  for (std::size_t i = 0; i < s.hidden2; ++i) {
    double z = params_.b2[i];
    const double* row = params_.w2.data() + i * s.hidden1;
    for (std::size_t j = 0; j < s.hidden1; ++j) z += row[j] * t.h1[j];
    t.h2[i] = sigmoid(z);
  }
  t.logit = params_.b3[0];
  for (std::size_t j = 0; j < s.hidden2; ++j) t.logit += params_.w3[j] * t.h2[j];
  t.output = sigmoid(t.logit);
  return t;
}

double EntailmentNet::forward(std::span<const double> input, std::span<const double> aux) const {
  return trace(input, aux).output;
}

double EntailmentNet::loss(std::span<const double> input, std::span<const double> aux,
                           double target) const {
  const double z = trace(input, aux).logit;
  return softplus(z) - target * z;
}

double EntailmentNet::loss_and_gradient(std::span<const double> input, std::span<const double> aux,
                                        double target, NetParams& grad) const {
  const auto& s = shape_;
  const auto t = trace(input, aux);
  const std::size_t in = s.hidden_input();

  const double g3 = t.output - target;
  for (std::size_t j = 0; j < s.hidden2; ++j) grad.w3[j] += g3 * t.h2[j];
  grad.b3[0] += g3;

  std::vector<double> dz2(s.hidden2);
  for (std::size_t i = 0; i < s.hidden2; ++i) {
    dz2[i] = g3 * params_.w3[i] * t.h2[i] * (1.0 - t.h2[i]);
  }
  std::vector<double> da1(s.hidden1, 0.0);
  for (std::size_t i = 0; i < s.hidden2; ++i) {
    double* grow = grad.w2.data() + i * s.hidden1;
    const double* prow = params_.w2.data() + i * s.hidden1;
    for (std::size_t j = 0; j < s.hidden1; ++j) {
      grow[j] += dz2[i] * t.h1[j];
      da1[j] += prow[j] * dz2[i];
    }
    grad.b2[i] += dz2[i];
  }

  std::vector<double> dz0(in, 0.0);
  for (std::size_t i = 0; i < s.hidden1; ++i) {
    const double dz1 = da1[i] * t.h1[i] * (1.0 - t.h1[i]);
    double* grow = grad.w1.data() + i * in;
    const double* prow = params_.w1.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) {
      grow[j] += dz1 * t.hidden_input[j];
      dz0[j] += prow[j] * dz1;
    }
    grad.b1[i] += dz1;
  }

  // Back through pooling (mean over each window) into the filters.
  const std::size_t per_map = s.pooled_per_map();
  const std::size_t len = s.map_length();
  for (std::size_t f = 0; f < s.filters; ++f) {
    for (std::size_t p = 0; p < per_map; ++p) {
      const std::size_t start = p * s.pool;
      const std::size_t end = std::min(start + s.pool, len);
      const double g = dz0[f * per_map + p] / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        for (std::size_t j = 0; j < s.filter_length; ++j) {
          grad.filters[f * s.filter_length + j] += g * input[i + j];
        }
      }
    }
  }
  return softplus(t.logit) - target * t.logit;
}

QaInput prepare_qa_input(const QaExample& example, const EmbeddingTable& table,
                         const AuxConfig& aux, const IndexModels& models) {
  QaInput out;
  out.id = example.id;
  out.label = example.label;
  out.input = interleave(bow_vector(example.question, table), bow_vector(example.sentence, table));
  out.aux = auxiliary_features(example.question, example.sentence, aux, models);
  return out;
}

double accuracy(const EntailmentNet& net, std::span<const QaInput> examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& e : examples) {
    const bool yes = net.forward(e.input, e.aux) > kDecisionThreshold;
    if (yes == (e.label == Label::Yes)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

QaTrainResult train_qa(std::span<const QaInput> examples, const NetShape& shape,
                       const QaTrainOptions& options) {
  if (options.restarts < 1) throw DataError("at least one training restart is required");
  if (options.batch_size < 1) throw DataError("batch size must be at least 1");

  std::vector<std::size_t> yes, no;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (examples[i].label == Label::Yes ? yes : no).push_back(i);
  }
  if (yes.size() < 2 || no.size() < 2) {
    throw DataError("entailment training needs at least two examples of each label (have " +
                    std::to_string(yes.size()) + " YES, " + std::to_string(no.size()) + " NO)");
  }

  Rng split_rng(options.seed);
  if (options.balance) {
    auto& major = yes.size() > no.size() ? yes : no;
    const std::size_t keep = std::min(yes.size(), no.size());
    split_rng.shuffle(major);
    major.resize(keep);
    std::sort(major.begin(), major.end());
  }
  std::vector<std::size_t> pool(yes);
  pool.insert(pool.end(), no.begin(), no.end());
  std::sort(pool.begin(), pool.end());
  split_rng.shuffle(pool);

  const auto n_val = static_cast<std::size_t>(
      std::floor(options.validation_fraction * static_cast<double>(pool.size())));
  std::vector<QaInput> validation, training;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    (i < n_val ? validation : training).push_back(examples[pool[i]]);
  }

  QaTrainResult result;
  result.options = options;
  result.train_count = training.size();
  result.validation_count = validation.size();
  const bool has_validation = !validation.empty();

  double best_overall = -1.0;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    const std::uint64_t seed = options.seed + r;
    EntailmentNet net(shape);
    net.init_uniform(seed, options.init_scale);
    Rng order_rng(seed ^ 0x9e3779b97f4a7c15ULL);

    RestartRecord rec;
    rec.seed = seed;
    double best = -1.0;
    NetParams best_params = net.params();
    std::vector<std::size_t> order(training.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
      order_rng.shuffle(order);
      for (std::size_t b = 0; b < order.size(); b += options.batch_size) {
        const std::size_t end = std::min(b + options.batch_size, order.size());
        auto grad = NetParams::zeros(shape);
        for (std::size_t i = b; i < end; ++i) {
          const auto& e = training[order[i]];
          net.loss_and_gradient(e.input, e.aux, e.label == Label::Yes ? 1.0 : 0.0, grad);
        }
        const double step = options.learning_rate / static_cast<double>(end - b);
        auto params = net.params().blocks();
        const auto grads = std::as_const(grad).blocks();
        for (std::size_t k = 0; k < params.size(); ++k) {
          for (std::size_t j = 0; j < params[k].size(); ++j) params[k][j] -= step * grads[k][j];
        }
      }
      rec.epochs_run = epoch;
      const double score = accuracy(net, has_validation ? std::span<const QaInput>(validation)
                                                        : std::span<const QaInput>(training));
      if (score > best) {
        best = score;
        rec.best_epoch = epoch;
        if (has_validation) best_params = net.params();
      }
      if (has_validation && epoch - rec.best_epoch >= options.patience) break;
    }
    if (has_validation) net.params() = best_params;
    rec.training_accuracy = accuracy(net, training);
    rec.validation_accuracy = has_validation ? accuracy(net, validation) : rec.training_accuracy;
    result.restarts.push_back(rec);
    if (rec.validation_accuracy > best_overall) {
      best_overall = rec.validation_accuracy;
      result.chosen = r;
      result.net = std::move(net);
    }
  }
  return result;
}

}  // namespace lqa
