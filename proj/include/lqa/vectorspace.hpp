#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lqa/textpipe.hpp"

namespace lqa {

struct SparseEntry {
  std::uint32_t index;
  double weight;

  bool operator==(const SparseEntry&) const = default;
};

/// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;

  /// Sorts by index, sums duplicates, drops zeros.
  static SparseVector from_pairs(std::vector<std::pair<std::uint32_t, double>> pairs);
  static SparseVector from_dense(std::span<const double> values);

  std::span<const SparseEntry> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  double weight(std::uint32_t index) const;
  double norm2() const;
  double norm1() const;
  double dot(const SparseVector& other) const;
  std::vector<double> to_dense(std::size_t dim) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<SparseEntry> entries_;
};

/// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
double smoothed_idf(std::size_t df, std::size_t document_count);

/// Term index with document frequencies. Terms are indexed in sorted order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df,
             std::size_t document_count);

  /// Throws DataError when `docs` is empty.
  static Vocabulary build(std::span<const TermSequence> docs);

  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t document_count() const noexcept { return document_count_; }
  std::optional<std::uint32_t> index(std::string_view term) const;
  const std::string& term(std::uint32_t i) const { return terms_[i]; }
  std::uint32_t df(std::uint32_t i) const { return df_[i]; }
  double idf(std::uint32_t i) const { return idf_[i]; }
  std::span<const std::string> terms() const noexcept { return terms_; }
  std::span<const std::uint32_t> dfs() const noexcept { return df_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::size_t document_count_ = 0;
};

/// Raw term counts; out-of-vocabulary terms are ignored.
SparseVector tf_vector(const TermSequence& terms, const Vocabulary& vocab);
/// tf(t) * smoothed_idf(t).
SparseVector tfidf_vector(const TermSequence& terms, const Vocabulary& vocab);

enum class Weighting { Tf, TfIdf };
std::string_view to_string(Weighting w);
Weighting parse_weighting(std::string_view s);

SparseVector weigh(const TermSequence& terms, const Vocabulary& vocab, Weighting w);

// ---------------------------------------------------------------------------
// Latent semantic indexing

struct LsiOptions {
  std::size_t k = 300;
  std::uint64_t seed = 42;
  std::size_t oversampling = 10;
  std::size_t power_iterations = 7;
  Weighting weighting = Weighting::TfIdf;
};

struct LsiModel {
  Weighting weighting = Weighting::TfIdf;
  Eigen::MatrixXd projection;       // |V| x k, orthonormal columns (right singular vectors)
  Eigen::VectorXd singular_values;  // length k, non-increasing
  LsiOptions options;               // as requested, before clamping

  std::size_t k() const noexcept { return static_cast<std::size_t>(projection.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(projection.rows()); }
};

/// Rank-k truncated SVD of the document-term matrix (one row per document)
/// by seeded randomized subspace iteration. k is clamped to
/// min(dim, docs.size()) with a warning; k < 1 throws DataError.
LsiModel fit_lsi(std::span<const SparseVector> docs, std::size_t dim, const LsiOptions& options);

/// Latent coordinates: projection^T * vec.
std::vector<double> project_lsi(const SparseVector& vec, const LsiModel& model);

// ---------------------------------------------------------------------------
// Latent Dirichlet allocation

struct LdaOptions {
  std::size_t k = 300;
  double alpha = 0.0;  // <= 0 selects 50 / k
  double beta = 0.01;
  std::size_t iterations = 500;
  std::size_t inference_iterations = 100;
  std::uint64_t seed = 42;
};

struct LdaModel {
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 0;
  std::size_t inference_iterations = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd topic_term;  // k x |V|, rows sum to 1

  std::size_t dim() const noexcept { return static_cast<std::size_t>(topic_term.cols()); }
};

/// Collapsed Gibbs sampling over TF documents (weights are token counts).
LdaModel fit_lda(std::span<const SparseVector> tf_docs, std::size_t dim,
                 const LdaOptions& options);

/// Topic distribution of a new document, sampled with the topic-term
/// weights frozen. Uses the model seed unless `seed` is given.
std::vector<double> infer_lda(const SparseVector& tf, const LdaModel& model,
                              std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace lqa
