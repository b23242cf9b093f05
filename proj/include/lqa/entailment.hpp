#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lqa/corpus.hpp"
#include "lqa/simfeatures.hpp"
#include "lqa/textpipe.hpp"

namespace lqa {

/// Word vectors of a fixed dimension. Absent words look up as zeros.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim), zero_(dim, 0.0) {}

  /// word2vec text format: "count dim" header, then "word v1 ... vdim".
  /// Throws ParseError with the offending line number.
  static EmbeddingTable parse(std::string_view text);
  static EmbeddingTable load(const std::string& path);

  void add(std::string word, std::vector<double> vec);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool contains(std::string_view word) const;
  std::span<const double> lookup(std::string_view word) const;

 private:
  std::size_t dim_;
  std::vector<double> zero_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// Mean of the word vectors; absent words contribute zeros but still count.
std::vector<double> bow_vector(const TermSequence& terms, const EmbeddingTable& table);

/// out[2i] = question[i], out[2i+1] = article[i].
std::vector<double> interleave(std::span<const double> question, std::span<const double> article);

/// o_i = filter . input[i .. i+h-1], stride 1.
std::vector<double> convolve(std::span<const double> input, std::span<const double> filter);

/// Non-overlapping windows of width `window`; the last partial window is
/// averaged over its own length.
std::vector<double> avg_pool(std::span<const double> map, std::size_t window);

enum class AuxMode { None, Scalar, Vector };
std::string_view to_string(AuxMode mode);
AuxMode parse_aux_mode(std::string_view s);

enum class AuxSides { Both, Question, Article };
std::string_view to_string(AuxSides sides);
AuxSides parse_aux_sides(std::string_view s);

struct AuxConfig {
  AuxMode lsi = AuxMode::Vector;
  AuxMode tfidf = AuxMode::Vector;
  AuxSides sides = AuxSides::Both;  // which vectors vector mode appends
};

std::size_t aux_width(const AuxConfig& config, const IndexModels& models);

/// LSI block then TF-IDF block. Scalar mode appends the cosine, vector mode
/// the question vector then the article vector (dense).
std::vector<double> auxiliary_features(const TermSequence& question, const TermSequence& article,
                                       const AuxConfig& config, const IndexModels& models);

/// Splits on sentence-final punctuation and semicolons and returns the piece
/// with the highest tf-idf cosine to the question (earliest on ties).
std::string select_article_sentence(std::string_view unit_text, const TermSequence& question,
                                    const Vocabulary& vocab, const NormalizerConfig& normalizer);

struct NetShape {
  std::size_t embedding_dim = 200;
  std::size_t filters = 10;
  std::size_t filter_length = 2;
  std::size_t pool = 100;
  std::size_t aux_width = 0;
  std::size_t hidden1 = 200;
  std::size_t hidden2 = 200;

  std::size_t input_length() const { return 2 * embedding_dim; }
  std::size_t map_length() const { return input_length() - filter_length + 1; }
  std::size_t pooled_per_map() const { return (map_length() + pool - 1) / pool; }
  std::size_t pooled_width() const { return filters * pooled_per_map(); }
  std::size_t hidden_input() const { return pooled_width() + aux_width; }

  bool operator==(const NetShape&) const = default;
};

/// All trainable tensors, row-major. Also used for gradients.
struct NetParams {
  std::vector<double> filters;  // filters x filter_length
  std::vector<double> w1, b1;   // hidden1 x hidden_input, hidden1
  std::vector<double> w2, b2;   // hidden2 x hidden1, hidden2
  std::vector<double> w3, b3;   // hidden2, 1

  static NetParams zeros(const NetShape& shape);
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  static constexpr std::array<std::string_view, 7> kBlockNames = {"filters", "w1", "b1", "w2",
                                                                  "b2",      "w3", "b3"};
};

/// Intermediate values of one forward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> maps;  // filters x map_length
  std::vector<double> hidden_input;       // pooled values then aux
  std::vector<double> h1, h2;
  double logit = 0.0;
  double output = 0.0;
};

class EntailmentNet {
 public:
  EntailmentNet() = default;
  explicit EntailmentNet(NetShape shape);

  const NetShape& shape() const noexcept { return shape_; }
  NetParams& params() noexcept { return params_; }
  const NetParams& params() const noexcept { return params_; }

  /// Uniform in [-scale, scale] for every weight and bias.
  void init_uniform(std::uint64_t seed, double scale);

  /// Probability of YES. Throws DataError on a shape mismatch.
  double forward(std::span<const double> input, std::span<const double> aux) const;
  ForwardTrace trace(std::span<const double> input, std::span<const double> aux) const;

  /// Binary cross-entropy for `target` in {0, 1}; adds d loss / d params to
  /// `grad`.
  double loss_and_gradient(std::span<const double> input, std::span<const double> aux,
                           double target, NetParams& grad) const;
  double loss(std::span<const double> input, std::span<const double> aux, double target) const;

 private:
  NetShape shape_;
  NetParams params_;
};

inline constexpr double kDecisionThreshold = 0.5;

/// A question paired with the sentence selected from a retrieved unit.
struct QaExample {
  std::string id;
  TermSequence question;
  TermSequence sentence;
  Label label = Label::No;
};

/// Network-ready input for one example.
struct QaInput {
  std::string id;
  std::vector<double> input;  // interleaved bag-of-words vectors
  std::vector<double> aux;
  Label label = Label::No;
};

QaInput prepare_qa_input(const QaExample& example, const EmbeddingTable& table,
                         const AuxConfig& aux, const IndexModels& models);

struct QaTrainOptions {
  std::size_t restarts = 10;
  std::uint64_t seed = 42;  // restart i uses seed + i
  double learning_rate = 0.01;
  std::size_t batch_size = 16;
  std::size_t epochs = 200;
  std::size_t patience = 20;  // stop after this many epochs without a validation gain
  double validation_fraction = 0.1;
  double init_scale = 0.05;
  bool balance = true;
};

struct RestartRecord {
  std::uint64_t seed = 0;
  double validation_accuracy = 0.0;  // training accuracy when no validation split exists
  double training_accuracy = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
};

struct QaTrainResult {
  EntailmentNet net;
  std::vector<RestartRecord> restarts;
  std::size_t chosen = 0;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  QaTrainOptions options;
};

double accuracy(const EntailmentNet& net, std::span<const QaInput> examples);

/// Balances labels by seeded downsampling, holds out a validation slice,
/// trains each restart by minibatch gradient descent and keeps the restart
/// with the best validation accuracy (lowest seed on ties).
/// Throws DataError when a class has fewer than two examples.
QaTrainResult train_qa(std::span<const QaInput> examples, const NetShape& shape,
                       const QaTrainOptions& options);

}  // namespace lqa
