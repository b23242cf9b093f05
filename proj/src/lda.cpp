#include <algorithm>
#include <numeric>

#include "lqa/error.hpp"
#include "lqa/random.hpp"
#include "lqa/vectorspace.hpp"

namespace lqa {

namespace {

std::vector<std::uint32_t> expand_tokens(const SparseVector& tf) {
  std::vector<std::uint32_t> words;
  for (const auto& e : tf.entries()) {
    const auto count = static_cast<long>(std::llround(e.weight));
    if (count < 0 || static_cast<double>(count) != e.weight) {
      throw DataError("LDA expects non-negative integer term counts");
    }
    words.insert(words.end(), static_cast<std::size_t>(count), e.index);
  }
  return words;
}

std::size_t draw(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

LdaModel fit_lda(std::span<const SparseVector> tf_docs, std::size_t dim,
                 const LdaOptions& options) {
  if (options.k < 1) throw DataError("LDA topic count k must be at least 1");
  if (options.iterations < 1) throw DataError("LDA iteration count must be at least 1");
  if (dim == 0) throw DataError("LDA needs a non-empty vocabulary");

  const std::size_t k = options.k;
  const double alpha = options.alpha > 0 ? options.alpha : 50.0 / static_cast<double>(k);
  const double beta = options.beta;
  const double vbeta = beta * static_cast<double>(dim);

  std::vector<std::vector<std::uint32_t>> words;
  words.reserve(tf_docs.size());
  for (const auto& d : tf_docs) {
    words.push_back(expand_tokens(d));
    for (auto w : words.back()) {
      if (w >= dim) throw DataError("document vector index exceeds vocabulary size");
    }
  }

  // Counts: doc-topic, topic-word (row-major k x dim), topic totals.
  std::vector<std::vector<std::uint32_t>> doc_topic(words.size(), std::vector<std::uint32_t>(k, 0));
  std::vector<std::uint32_t> topic_word(k * dim, 0);
  std::vector<std::uint32_t> topic_total(k, 0);
  std::vector<std::vector<std::uint32_t>> z(words.size());

  Rng rng(options.seed);
  for (std::size_t d = 0; d < words.size(); ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      const auto t = static_cast<std::uint32_t>(rng.below(k));
      z[d][i] = t;
      ++doc_topic[d][t];
      ++topic_word[t * dim + words[d][i]];
      ++topic_total[t];
    }
  }

  std::vector<double> cumulative(k);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    for (std::size_t d = 0; d < words.size(); ++d) {
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const auto w = words[d][i];
        const auto old = z[d][i];
        --doc_topic[d][old];
        --topic_word[old * dim + w];
        --topic_total[old];

        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
          acc += (doc_topic[d][t] + alpha) * (topic_word[t * dim + w] + beta) /
                 (topic_total[t] + vbeta);
          cumulative[t] = acc;
        }
        const auto t = static_cast<std::uint32_t>(draw(cumulative, rng.uniform()));
        z[d][i] = t;
        ++doc_topic[d][t];
        ++topic_word[t * dim + w];
        ++topic_total[t];
      }
    }
  }

  LdaModel model;
  model.k = k;
  model.alpha = alpha;
  model.beta = beta;
  model.iterations = options.iterations;
  model.inference_iterations = options.inference_iterations;
  model.seed = options.seed;
  model.topic_term.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  for (std::size_t t = 0; t < k; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    for (std::size_t w = 0; w < dim; ++w) {
      model.topic_term(row, static_cast<Eigen::Index>(w)) = topic_word[t * dim + w] + beta;
    }
    model.topic_term.row(row) /= model.topic_term.row(row).sum();
  }
  return model;
}

std::vector<double> infer_lda(const SparseVector& tf, const LdaModel& model,
                              std::optional<std::uint64_t> seed) {
  const std::size_t k = model.k;
  std::vector<std::uint32_t> words;
  for (auto w : expand_tokens(tf)) {
    if (w < model.dim()) words.push_back(w);
  }
  std::vector<double> theta(k, 1.0 / static_cast<double>(k));
  if (words.empty() || k == 0) return theta;

  Rng rng(seed.value_or(model.seed));
  std::vector<std::uint32_t> counts(k, 0);
  std::vector<std::uint32_t> z(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = static_cast<std::uint32_t>(rng.below(k));
    ++counts[z[i]];
  }

  // Average the posterior estimate over the second half of the sweeps.
  const std::size_t sweeps = std::max<std::size_t>(model.inference_iterations, 1);
  const std::size_t burn_in = sweeps / 2;
  std::vector<double> accum(k, 0.0);
  std::vector<double> cumulative(k);
  const double denom = static_cast<double>(words.size()) + static_cast<double>(k) * model.alpha;
  for (std::size_t s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --counts[z[i]];
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        acc += (counts[t] + model.alpha) *
               model.topic_term(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(words[i]));
        cumulative[t] = acc;
      }
      z[i] = static_cast<std::uint32_t>(draw(cumulative, rng.uniform()));
      ++counts[z[i]];
    }
    if (s >= burn_in) {
      for (std::size_t t = 0; t < k; ++t) accum[t] += (counts[t] + model.alpha) / denom;
    }
  }
  const double total = std::accumulate(accum.begin(), accum.end(), 0.0);
  for (std::size_t t = 0; t < k; ++t) theta[t] = accum[t] / total;
  return theta;
}

}  // namespace lqa
