#include "lqa/vectorspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lqa/error.hpp"
#include "lqa/strings.hpp"

namespace lqa {

SparseVector SparseVector::from_pairs(std::vector<std::pair<std::uint32_t, double>> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v;
  for (const auto& [i, w] : pairs) {
    if (!v.entries_.empty() && v.entries_.back().index == i) {
      v.entries_.back().weight += w;
    } else {
      v.entries_.push_back({i, w});
    }
  }
  std::erase_if(v.entries_, [](const SparseEntry& e) { return e.weight == 0.0; });
  return v;
}

SparseVector SparseVector::from_dense(std::span<const double> values) {
  SparseVector v;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) v.entries_.push_back({static_cast<std::uint32_t>(i), values[i]});
  }
  return v;
}

double SparseVector::weight(std::uint32_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const SparseEntry& e, std::uint32_t i) { return e.index < i; });
  return it != entries_.end() && it->index == index ? it->weight : 0.0;
}

double SparseVector::norm2() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.weight * e.weight;
  return std::sqrt(s);
}

double SparseVector::norm1() const {
  double s = 0.0;
  for (const auto& e : entries_) s += std::abs(e.weight);
  return s;
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      s += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return s;
}

std::vector<double> SparseVector::to_dense(std::size_t dim) const {
  std::vector<double> out(dim, 0.0);
  for (const auto& e : entries_) {
    if (e.index < dim) out[e.index] = e.weight;
  }
  return out;
}

double smoothed_idf(std::size_t df, std::size_t document_count) {
  return std::log((1.0 + static_cast<double>(document_count)) / (1.0 + static_cast<double>(df))) +
         1.0;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df,
                       std::size_t document_count)
    : terms_(std::move(terms)), df_(std::move(df)), document_count_(document_count) {
  if (terms_.size() != df_.size()) throw DataError("vocabulary: term and df tables differ in size");
  idf_.reserve(terms_.size());
  for (std::uint32_t i = 0; i < terms_.size(); ++i) {
    if (df_[i] < 1) throw DataError("vocabulary: term '" + terms_[i] + "' has df 0");
    if (!lookup_.emplace(terms_[i], i).second) {
      throw DataError("vocabulary: duplicate term '" + terms_[i] + "'");
    }
    idf_.push_back(smoothed_idf(df_[i], document_count_));
  }
}

Vocabulary Vocabulary::build(std::span<const TermSequence> docs) {
  if (docs.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::uint32_t> counts;
  for (const auto& doc : docs) {
    std::set<std::string_view> distinct(doc.begin(), doc.end());
    for (auto t : distinct) ++counts[std::string(t)];
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  for (auto& [t, c] : counts) {
    terms.push_back(t);
    df.push_back(c);
  }
  return Vocabulary(std::move(terms), std::move(df), docs.size());
}

std::optional<std::uint32_t> Vocabulary::index(std::string_view term) const {
  auto it = lookup_.find(std::string(term));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

SparseVector tf_vector(const TermSequence& terms, const Vocabulary& vocab) {
  std::vector<std::pair<std::uint32_t, double>> pairs;
  for (const auto& t : terms) {
    if (auto i = vocab.index(t)) pairs.emplace_back(*i, 1.0);
  }
  return SparseVector::from_pairs(std::move(pairs));
}

SparseVector tfidf_vector(const TermSequence& terms, const Vocabulary& vocab) {
  auto tf = tf_vector(terms, vocab);
  std::vector<std::pair<std::uint32_t, double>> pairs;
  for (const auto& e : tf.entries()) pairs.emplace_back(e.index, e.weight * vocab.idf(e.index));
  return SparseVector::from_pairs(std::move(pairs));
}

std::string_view to_string(Weighting w) { return w == Weighting::Tf ? "TF" : "TFIDF"; }

Weighting parse_weighting(std::string_view s) {
  const auto up = to_upper(trim(s));
  if (up == "TF") return Weighting::Tf;
  if (up == "TFIDF" || up == "TF-IDF") return Weighting::TfIdf;
  throw DataError("unknown weighting '" + std::string(s) + "'");
}

SparseVector weigh(const TermSequence& terms, const Vocabulary& vocab, Weighting w) {
  return w == Weighting::Tf ? tf_vector(terms, vocab) : tfidf_vector(terms, vocab);
}

}  // namespace lqa
