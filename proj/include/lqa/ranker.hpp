#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lqa/simfeatures.hpp"

namespace lqa {

/// One retrievable unit as seen from one query.
struct Candidate {
  std::string unit_id;
  std::string parent_id;
  std::vector<double> raw;  // unscaled feature values, aligned to the set's kinds
  double prefilter = 0.0;   // tf-idf cosine, used to pick hard negatives
  bool relevant = false;
};

/// Every unit of the corpus paired with one query.
struct CandidateSet {
  std::string query_id;
  std::vector<std::string> gold_articles;
  std::vector<Candidate> units;

  bool has_relevant() const;
};

/// Keeps only the feature columns at `columns` (positions into the set's
/// current kind list).
CandidateSet select_columns(const CandidateSet& set, std::span<const std::size_t> columns);

struct PairSample {
  FeatureVector relevant;
  FeatureVector irrelevant;
};

struct QueryPairs {
  std::string query_id;
  std::vector<PairSample> pairs;
};

struct PairwiseSet {
  std::vector<QueryPairs> queries;
  std::size_t size() const;
};

struct SamplerConfig {
  std::size_t hard_negatives = 50;    // top-m non-relevant units by tf-idf cosine
  std::size_t random_negatives = 50;  // plus r uniform draws from the rest
  std::uint64_t seed = 42;
};

/// Relevant units x sampled negatives for every query. Queries without a
/// relevant unit are skipped with a warning.
PairwiseSet build_pairs(std::span<const CandidateSet> sets, const SamplerConfig& config);

struct TrainOptions {
  double c = 600.0;
  std::uint64_t seed = 42;
  std::size_t epochs = 200;
  double tolerance = 1e-6;  // stop once no dual coordinate moves by more than this
  bool scale = true;
};

struct RankModel {
  std::vector<FeatureKind> kinds;
  std::vector<double> w;
  double c = 0.0;
  std::optional<MinMaxScaler> scaler;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 0;
  std::size_t epochs_run = 0;
  double tolerance = 0.0;
  double training_loss = 0.0;  // sum of hinge losses at the final w
  double objective = 0.0;      // 0.5 |w|^2 + C * training_loss
  std::vector<double> objective_history;  // primal objective after each epoch
};

/// Minimizes 0.5 |w|^2 + C * sum max(0, 1 - w.(x_u - x_v)) by dual
/// coordinate descent, visiting pairs in a seeded order each epoch.
/// Throws DataError on empty pairs, C <= 0, or a non-finite feature value.
RankModel train(const PairwiseSet& pairs, std::span<const FeatureKind> kinds,
                const TrainOptions& options);

/// w.x; unscaled vectors are scaled with the model's statistics first.
double score(const RankModel& model, const FeatureVector& fv);
double score_raw(const RankModel& model, std::span<const double> raw);

struct ScoredUnit {
  std::string unit_id;
  std::string parent_id;
  double score = 0.0;

  bool operator==(const ScoredUnit&) const = default;
};

struct RankedList {
  std::string query_id;
  std::vector<ScoredUnit> entries;  // scores non-increasing, ties by unit id
};

struct RetrieveOptions {
  double ratio = 0.85;
  std::optional<std::size_t> top_k;
};

/// Sorts by score descending, ties by unit id ascending.
void sort_ranked(std::vector<ScoredUnit>& entries);

/// Cuts a sorted list: the k best when top_k is set, otherwise every entry
/// with score / best >= ratio. A non-positive best keeps only the top one.
std::vector<ScoredUnit> cut_ranked(std::vector<ScoredUnit> sorted, const RetrieveOptions& options);

/// Scores every candidate and applies cut_ranked. Throws on an empty set.
RankedList retrieve(const RankModel& model, const CandidateSet& set,
                    const RetrieveOptions& options);

struct SweepRow {
  double c = 0.0;
  double f1 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double best_c = 0.0;
  double best_f1 = 0.0;
};

struct SweepOptions {
  SamplerConfig sampler;
  TrainOptions train;
  RetrieveOptions retrieve;
};

/// Trains one model per C on `train_sets`, scores held-out F1 on
/// `validation_sets`. Ties go to the smaller C. Throws on an empty grid.
SweepResult sweep_c(std::span<const CandidateSet> train_sets,
                    std::span<const CandidateSet> validation_sets,
                    std::span<const FeatureKind> kinds, std::span<const double> grid,
                    const SweepOptions& options);

/// 100, 200, ..., 2000.
std::vector<double> c_grid(double from, double to, double step);

}  // namespace lqa
