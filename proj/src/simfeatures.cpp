#include "lqa/simfeatures.hpp"

#include <algorithm>
#include <cmath>

#include "lqa/error.hpp"
#include "lqa/strings.hpp"

namespace lqa {

namespace {

// Visits the union of supports of two sparse vectors in index order.
template <typename F>
void merge_visit(const SparseVector& a, const SparseVector& b, F&& f) {
  auto x = a.entries().begin();
  auto y = b.entries().begin();
  const auto xe = a.entries().end();
  const auto ye = b.entries().end();
  while (x != xe || y != ye) {
    if (y == ye || (x != xe && x->index < y->index)) {
      f(x->weight, 0.0);
      ++x;
    } else if (x == xe || y->index < x->index) {
      f(0.0, y->weight);
      ++y;
    } else {
      f(x->weight, y->weight);
      ++x;
      ++y;
    }
  }
}

bool needs_tf(FeatureKind k) {
  return k == FeatureKind::EuclideanTf || k == FeatureKind::ManhattanTf ||
         k == FeatureKind::LdaCosine;
}

bool needs_tfidf(FeatureKind k) {
  return k == FeatureKind::TfidfCosine || k == FeatureKind::JaccardTfidf;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::TfidfCosine: return "TFIDF_COSINE";
    case FeatureKind::EuclideanTf: return "EUCLIDEAN_TF";
    case FeatureKind::ManhattanTf: return "MANHATTAN_TF";
    case FeatureKind::JaccardTfidf: return "JACCARD_TFIDF";
    case FeatureKind::LsiCosine: return "LSI_COSINE";
    case FeatureKind::LdaCosine: return "LDA_COSINE";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view name) {
  const auto up = to_upper(trim(name));
  for (auto k : kAllFeatureKinds) {
    if (up == to_string(k)) return k;
  }
  if (up == "TFIDF" || up == "TF-IDF") return FeatureKind::TfidfCosine;
  if (up == "EUCLIDEAN") return FeatureKind::EuclideanTf;
  if (up == "MANHATTAN") return FeatureKind::ManhattanTf;
  if (up == "JACCARD") return FeatureKind::JaccardTfidf;
  if (up == "LSI") return FeatureKind::LsiCosine;
  if (up == "LDA") return FeatureKind::LdaCosine;
  throw DataError("unknown feature kind '" + std::string(name) + "'");
}

std::vector<FeatureKind> parse_feature_kinds(std::string_view comma_list) {
  std::vector<FeatureKind> out;
  for (const auto& name : split_list(comma_list, ',')) out.push_back(parse_feature_kind(name));
  if (out.empty()) throw DataError("empty feature kind list");
  return out;
}

std::string format_feature_kinds(std::span<const FeatureKind> kinds, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += sep;
    out += to_string(kinds[i]);
  }
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm2();
  const double nb = b.norm2();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("cosine: vectors differ in length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double euclidean_distance(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  merge_visit(a, b, [&](double x, double y) { s += (x - y) * (x - y); });
  return std::sqrt(s);
}

double manhattan_distance(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  merge_visit(a, b, [&](double x, double y) { s += std::abs(x - y); });
  return s;
}

double generalized_jaccard(const SparseVector& a, const SparseVector& b) {
  double num = 0.0, den = 0.0;
  merge_visit(a, b, [&](double x, double y) {
    if (x < 0.0 || y < 0.0) throw DataError("generalized Jaccard needs non-negative weights");
    num += std::min(x, y);
    den += std::max(x, y);
  });
  if (den == 0.0) return 1.0;
  return num / den;
}

double jaccard_distance(const SparseVector& a, const SparseVector& b) {
  return 1.0 - generalized_jaccard(a, b);
}

double hellinger_similarity(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DataError("hellinger: vectors differ in length");
  double bc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(std::max(0.0, p[i] * q[i]));
  return 1.0 - std::sqrt(std::max(0.0, 1.0 - bc));
}

void require_models(std::span<const FeatureKind> kinds, const IndexModels& models) {
  for (auto k : kinds) {
    if (k == FeatureKind::LsiCosine && !models.lsi) {
      throw DataError(std::string(to_string(k)) + " needs a fitted LSI model");
    }
    if (k == FeatureKind::LdaCosine && !models.lda) {
      throw DataError(std::string(to_string(k)) + " needs a fitted LDA model");
    }
  }
}

TextRepresentation represent(const TermSequence& terms, const IndexModels& models,
                             std::span<const FeatureKind> kinds) {
  require_models(kinds, models);
  const bool tf = std::any_of(kinds.begin(), kinds.end(), needs_tf);
  const bool tfidf = std::any_of(kinds.begin(), kinds.end(), needs_tfidf);
  const bool lsi = std::find(kinds.begin(), kinds.end(), FeatureKind::LsiCosine) != kinds.end();
  const bool lda = std::find(kinds.begin(), kinds.end(), FeatureKind::LdaCosine) != kinds.end();

  TextRepresentation r;
  if (tf) r.tf = tf_vector(terms, models.vocab);
  if (tfidf) r.tfidf = tfidf_vector(terms, models.vocab);
  if (lsi) r.lsi = project_lsi(weigh(terms, models.vocab, models.lsi->weighting), *models.lsi);
  if (lda) r.lda = infer_lda(r.tf, *models.lda);
  return r;
}

std::vector<double> raw_features(const TextRepresentation& query, const TextRepresentation& unit,
                                 std::span<const FeatureKind> kinds, const IndexModels& models) {
  require_models(kinds, models);
  std::vector<double> out;
  out.reserve(kinds.size());
  for (auto k : kinds) {
    switch (k) {
      case FeatureKind::TfidfCosine: out.push_back(cosine(query.tfidf, unit.tfidf)); break;
      case FeatureKind::EuclideanTf: out.push_back(euclidean_distance(query.tf, unit.tf)); break;
      case FeatureKind::ManhattanTf: out.push_back(manhattan_distance(query.tf, unit.tf)); break;
      case FeatureKind::JaccardTfidf: out.push_back(jaccard_distance(query.tfidf, unit.tfidf)); break;
      case FeatureKind::LsiCosine: out.push_back(cosine(query.lsi, unit.lsi)); break;
      case FeatureKind::LdaCosine:
        out.push_back(models.topic_similarity == TopicSimilarity::Cosine
                          ? cosine(query.lda, unit.lda)
                          : hellinger_similarity(query.lda, unit.lda));
        break;
    }
  }
  return out;
}

MinMaxScaler MinMaxScaler::fit(std::span<const std::vector<double>> rows) {
  MinMaxScaler s;
  if (rows.empty()) return s;
  s.min = rows.front();
  s.max = rows.front();
  for (const auto& r : rows) {
    if (r.size() != s.min.size()) throw DataError("scaler: rows differ in length");
    for (std::size_t j = 0; j < r.size(); ++j) {
      s.min[j] = std::min(s.min[j], r[j]);
      s.max[j] = std::max(s.max[j], r[j]);
    }
  }
  return s;
}

std::vector<double> MinMaxScaler::transform(std::span<const double> values) const {
  if (values.size() != min.size()) throw DataError("scaler: feature count mismatch");
  std::vector<double> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double range = max[j] - min[j];
    out[j] = range > 0.0 ? std::clamp((values[j] - min[j]) / range, 0.0, 1.0) : 0.0;
  }
  return out;
}

FeatureVector feature_vector(const TermSequence& query, const TermSequence& unit,
                             std::span<const FeatureKind> kinds, const IndexModels& models,
                             const MinMaxScaler* scaler) {
  const auto q = represent(query, models, kinds);
  const auto u = represent(unit, models, kinds);
  FeatureVector fv;
  fv.values = raw_features(q, u, kinds, models);
  if (scaler) {
    fv.values = scaler->transform(fv.values);
    fv.scaled = true;
  }
  return fv;
}

}  // namespace lqa
