#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lqa/textpipe.hpp"
#include "lqa/vectorspace.hpp"

namespace lqa {

enum class FeatureKind {
  TfidfCosine,
  EuclideanTf,
  ManhattanTf,
  JaccardTfidf,
  LsiCosine,
  LdaCosine,
};

inline constexpr std::array<FeatureKind, 6> kAllFeatureKinds = {
    FeatureKind::TfidfCosine, FeatureKind::EuclideanTf, FeatureKind::ManhattanTf,
    FeatureKind::JaccardTfidf, FeatureKind::LsiCosine, FeatureKind::LdaCosine};

/// "TFIDF_COSINE", "EUCLIDEAN_TF", "MANHATTAN_TF", "JACCARD_TFIDF",
/// "LSI_COSINE", "LDA_COSINE".
std::string_view to_string(FeatureKind kind);

/// Accepts the canonical names and the short forms TFIDF (or TF-IDF),
/// EUCLIDEAN, MANHATTAN, JACCARD, LSI, LDA; case-insensitive.
FeatureKind parse_feature_kind(std::string_view name);
std::vector<FeatureKind> parse_feature_kinds(std::string_view comma_list);
std::string format_feature_kinds(std::span<const FeatureKind> kinds, std::string_view sep = ",");

double cosine(const SparseVector& a, const SparseVector& b);
double cosine(std::span<const double> a, std::span<const double> b);

double euclidean_distance(const SparseVector& a, const SparseVector& b);
double manhattan_distance(const SparseVector& a, const SparseVector& b);

/// sum(min) / sum(max) over the union of supports; 1.0 when both are empty.
/// Throws DataError on a negative weight.
double generalized_jaccard(const SparseVector& a, const SparseVector& b);
double jaccard_distance(const SparseVector& a, const SparseVector& b);

/// 1 - Hellinger distance between two probability vectors.
double hellinger_similarity(std::span<const double> p, std::span<const double> q);

enum class TopicSimilarity { Cosine, Hellinger };

/// The fitted index: vocabulary plus the optional latent models.
struct IndexModels {
  Vocabulary vocab;
  std::optional<LsiModel> lsi;
  std::optional<LdaModel> lda;
  TopicSimilarity topic_similarity = TopicSimilarity::Cosine;
};

/// Throws DataError naming the first kind whose model is missing.
void require_models(std::span<const FeatureKind> kinds, const IndexModels& models);

/// The vectors a text needs for `kinds`; unused members stay empty.
struct TextRepresentation {
  SparseVector tf;
  SparseVector tfidf;
  std::vector<double> lsi;
  std::vector<double> lda;
};

TextRepresentation represent(const TermSequence& terms, const IndexModels& models,
                             std::span<const FeatureKind> kinds);

/// One unscaled value per kind, in order.
std::vector<double> raw_features(const TextRepresentation& query, const TextRepresentation& unit,
                                 std::span<const FeatureKind> kinds, const IndexModels& models);

/// Per-feature min-max scaling from training statistics, clamped to [0, 1].
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  static MinMaxScaler fit(std::span<const std::vector<double>> rows);
  std::vector<double> transform(std::span<const double> values) const;
  std::size_t size() const noexcept { return min.size(); }
};

struct FeatureVector {
  std::string query_id;
  std::string unit_id;
  std::vector<double> values;  // aligned to the configured kind list
  bool scaled = false;
};

FeatureVector feature_vector(const TermSequence& query, const TermSequence& unit,
                             std::span<const FeatureKind> kinds, const IndexModels& models,
                             const MinMaxScaler* scaler = nullptr);

}  // namespace lqa
