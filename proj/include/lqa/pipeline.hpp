#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lqa/corpus.hpp"
#include "lqa/entailment.hpp"
#include "lqa/metrics.hpp"
#include "lqa/ranker.hpp"
#include "lqa/simfeatures.hpp"
#include "lqa/textpipe.hpp"

namespace lqa {

struct IndexOptions {
  bool fit_lsi = true;
  bool fit_lda = true;
  LsiOptions lsi;
  LdaOptions lda;
  TopicSimilarity topic_similarity = TopicSimilarity::Cosine;
};

/// Vocabulary over the unit term sequences plus the requested latent models.
IndexModels build_index(std::span<const TermSequence> unit_terms, const IndexOptions& options);

/// Seeded split of cases by id: returns (train, test). At least one case
/// lands on each side when there are two or more.
std::pair<std::vector<QueryCase>, std::vector<QueryCase>> split_cases(
    std::span<const QueryCase> cases, double test_fraction, std::uint64_t seed);

/// Preprocessed corpus and fitted index; answers retrieval queries.
class Engine {
 public:
  Engine(UnitIndex units, IndexModels models, NormalizerConfig normalizer);

  const UnitIndex& units() const noexcept { return units_; }
  const IndexModels& models() const noexcept { return models_; }
  const NormalizerConfig& normalizer() const noexcept { return normalizer_; }
  std::span<const TermSequence> unit_terms() const noexcept { return unit_terms_; }

  TermSequence terms(std::string_view text) const { return preprocess(text, normalizer_); }

  /// Every unit scored against the case question for `kinds`. Units of the
  /// case's gold articles are marked relevant.
  CandidateSet candidates(const QueryCase& qc, std::span<const FeatureKind> kinds) const;
  std::vector<CandidateSet> candidates(std::span<const QueryCase> cases,
                                       std::span<const FeatureKind> kinds) const;

  /// The gold unit closest to the question by tf-idf cosine, or nullopt
  /// when none of the case's gold articles has a unit.
  std::optional<std::size_t> best_gold_unit(const QueryCase& qc) const;

  /// The case question paired with the best sentence of unit `position`.
  QaExample qa_example(const QueryCase& qc, std::size_t position) const;

 private:
  UnitIndex units_;
  IndexModels models_;
  NormalizerConfig normalizer_;
  std::vector<TermSequence> unit_terms_;
  std::vector<TextRepresentation> unit_reprs_;
  std::vector<FeatureKind> available_;
};

/// Training examples: each case with a reachable gold unit contributes one.
std::vector<QaExample> build_qa_examples(const Engine& engine, std::span<const QueryCase> cases);

// ---------------------------------------------------------------------------
// Answering

enum class VotingScenario { NoVoting, Majority, Ratio };
std::string_view to_string(VotingScenario scenario);
VotingScenario parse_voting_scenario(std::string_view s);

struct Vote {
  std::string unit_id;
  double score = 0.0;
  Label label = Label::No;
  double probability = 0.0;
};

struct Decision {
  Label label = Label::No;
  double yes_weight = 0.0;
  double no_weight = 0.0;
  bool tie = false;  // resolved by the top-ranked vote
};

/// Combines per-unit votes, ordered by rank. NO_VOTING takes the top vote;
/// MAJORITY counts votes; RATIO weighs each vote by max(score, 0). Ties go
/// to the top vote. Throws DataError on an empty vote list.
Decision decide(std::span<const Vote> votes, VotingScenario scenario);

struct AnswerTrace {
  std::string case_id;
  Decision decision;
  std::vector<Vote> votes;
};

/// The trained pieces needed to answer a question end to end.
struct QaSystem {
  const Engine* engine = nullptr;
  const RankModel* ranker = nullptr;
  const EntailmentNet* net = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  AuxConfig aux;
};

/// Retrieves the top-k units, classifies each (question, sentence) pair and
/// applies the voting scenario.
AnswerTrace answer(const QaSystem& system, const QueryCase& qc, VotingScenario scenario,
                   std::size_t k = 5);

// ---------------------------------------------------------------------------
// Experiments

struct IrProtocol {
  SamplerConfig sampler;
  TrainOptions train;
  RetrieveOptions retrieve;
  double test_fraction = 0.2;
  Averaging averaging = Averaging::Micro;
};

/// Held-out IR F1 over candidate sets precomputed for a fixed kind list.
class IrExperiment {
 public:
  IrExperiment(std::vector<CandidateSet> sets, std::vector<FeatureKind> kinds, IrProtocol protocol);

  std::span<const FeatureKind> kinds() const noexcept { return kinds_; }
  const IrProtocol& protocol() const noexcept { return protocol_; }

  /// Split by `seed`, train on the subset `kinds`, evaluate the held-out part.
  double f1(std::span<const FeatureKind> kinds, std::uint64_t seed,
            std::optional<double> c = std::nullopt) const;

  /// Train/test candidate sets for `seed`, restricted to `kinds`.
  std::pair<std::vector<CandidateSet>, std::vector<CandidateSet>> split(
      std::span<const FeatureKind> kinds, std::uint64_t seed) const;

 private:
  std::vector<CandidateSet> sets_;
  std::vector<FeatureKind> kinds_;
  IrProtocol protocol_;
};

using SubsetEvaluator = std::function<double(std::span<const FeatureKind>, std::uint64_t)>;

struct AblationRow {
  std::string description;
  std::vector<FeatureKind> kinds;
  std::vector<double> values;  // one F1 per seed
  double mean = 0.0;
  double deviation = 0.0;      // population standard deviation

  /// "0.603 ± 0.005"
  std::string formatted() const;
};

struct AblationReport {
  std::string mode;
  std::vector<AblationRow> rows;
};

AblationRow summarize(std::string description, std::vector<FeatureKind> kinds,
                      std::vector<double> values);

/// Full set first, then the set without each kind in turn.
AblationReport ablate_leave_one_out(const SubsetEvaluator& evaluate,
                                    std::span<const FeatureKind> all,
                                    std::span<const std::uint64_t> seeds);

/// One row per requested group, in request order (duplicates kept).
AblationReport ablate_triples(const SubsetEvaluator& evaluate,
                              std::span<const std::vector<FeatureKind>> groups,
                              std::span<const std::uint64_t> seeds);

/// One row per C; each row averages the held-out F1 over `seeds`.
AblationReport ablate_c_sweep(const IrExperiment& experiment, std::span<const FeatureKind> kinds,
                              std::span<const double> grid, std::span<const std::uint64_t> seeds);

/// Groups separated by ';', kinds by ','. Throws DataError on unknown names.
std::vector<std::vector<FeatureKind>> parse_feature_groups(std::string_view text);

/// The four default feature triples for the triples ablation.
std::vector<std::vector<FeatureKind>> reported_triples();

/// Tab-separated report: description, mean, deviation, formatted, per-seed values.
std::string to_tsv(const AblationReport& report);

}  // namespace lqa
