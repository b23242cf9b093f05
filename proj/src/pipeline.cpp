#include "lqa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "lqa/error.hpp"
#include "lqa/random.hpp"
#include "lqa/strings.hpp"

namespace lqa {

IndexModels build_index(std::span<const TermSequence> unit_terms, const IndexOptions& options) {
  IndexModels models;
  models.vocab = Vocabulary::build(unit_terms);
  models.topic_similarity = options.topic_similarity;
  if (options.fit_lsi) {
    std::vector<SparseVector> docs;
    docs.reserve(unit_terms.size());
    for (const auto& t : unit_terms) docs.push_back(weigh(t, models.vocab, options.lsi.weighting));
    models.lsi = fit_lsi(docs, models.vocab.size(), options.lsi);
  }
  if (options.fit_lda) {
    std::vector<SparseVector> docs;
    docs.reserve(unit_terms.size());
    for (const auto& t : unit_terms) docs.push_back(tf_vector(t, models.vocab));
    models.lda = fit_lda(docs, models.vocab.size(), options.lda);
  }
  return models;
}

std::pair<std::vector<QueryCase>, std::vector<QueryCase>> split_cases(
    std::span<const QueryCase> cases, double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(cases.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cases[a].id < cases[b].id; });
  Rng rng(seed);
  rng.shuffle(order);

  auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(cases.size())));
  if (cases.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, cases.size() - 1);

  std::vector<bool> is_test(cases.size(), false);
  for (std::size_t i = 0; i < n_test && i < order.size(); ++i) is_test[order[i]] = true;
  std::pair<std::vector<QueryCase>, std::vector<QueryCase>> out;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    (is_test[i] ? out.second : out.first).push_back(cases[i]);
  }
  return out;
}

Engine::Engine(UnitIndex units, IndexModels models, NormalizerConfig normalizer)
    : units_(std::move(units)), models_(std::move(models)), normalizer_(std::move(normalizer)) {
  available_ = {FeatureKind::TfidfCosine, FeatureKind::EuclideanTf, FeatureKind::ManhattanTf,
                FeatureKind::JaccardTfidf};
  if (models_.lsi) available_.push_back(FeatureKind::LsiCosine);
  if (models_.lda) available_.push_back(FeatureKind::LdaCosine);

  unit_terms_.reserve(units_.size());
  unit_reprs_.reserve(units_.size());
  for (const auto& u : units_.units()) {
    unit_terms_.push_back(preprocess(u.text, normalizer_));
    unit_reprs_.push_back(represent(unit_terms_.back(), models_, available_));
  }
}

CandidateSet Engine::candidates(const QueryCase& qc, std::span<const FeatureKind> kinds) const {
  require_models(kinds, models_);
  const auto q = represent(terms(qc.question), models_, available_);
  const auto relevant = units_.relevant_units(qc.relevant_ids);

  CandidateSet set;
  set.query_id = qc.id;
  set.gold_articles = qc.relevant_ids;
  set.units.reserve(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const auto& u = units_[i];
    Candidate c;
    c.unit_id = u.id;
    c.parent_id = u.parent_id;
    c.raw = raw_features(q, unit_reprs_[i], kinds, models_);
    c.prefilter = cosine(q.tfidf, unit_reprs_[i].tfidf);
    c.relevant = std::binary_search(relevant.begin(), relevant.end(), i);
    set.units.push_back(std::move(c));
  }
  return set;
}

std::vector<CandidateSet> Engine::candidates(std::span<const QueryCase> cases,
                                             std::span<const FeatureKind> kinds) const {
  std::vector<CandidateSet> out;
  out.reserve(cases.size());
  for (const auto& qc : cases) out.push_back(candidates(qc, kinds));
  return out;
}

std::optional<std::size_t> Engine::best_gold_unit(const QueryCase& qc) const {
  const auto relevant = units_.relevant_units(qc.relevant_ids);
  if (relevant.empty()) return std::nullopt;
  const auto q = tfidf_vector(terms(qc.question), models_.vocab);
  std::size_t best = relevant.front();
  double best_score = -1.0;
  for (auto i : relevant) {
    const double s = cosine(q, unit_reprs_[i].tfidf);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

QaExample Engine::qa_example(const QueryCase& qc, std::size_t position) const {
  QaExample ex;
  ex.id = qc.id;
  ex.label = qc.label;
  ex.question = terms(qc.question);
  const auto sentence =
      select_article_sentence(units_[position].text, ex.question, models_.vocab, normalizer_);
  ex.sentence = terms(sentence);
  return ex;
}

std::vector<QaExample> build_qa_examples(const Engine& engine, std::span<const QueryCase> cases) {
  std::vector<QaExample> out;
  for (const auto& qc : cases) {
    const auto best = engine.best_gold_unit(qc);
    if (!best) {
      spdlog::warn("case {} has no reachable gold unit; left out of QA training", qc.id);
      continue;
    }
    out.push_back(engine.qa_example(qc, *best));
  }
  return out;
}

std::string_view to_string(VotingScenario scenario) {
  switch (scenario) {
    case VotingScenario::NoVoting: return "NO_VOTING";
    case VotingScenario::Majority: return "MAJORITY";
    case VotingScenario::Ratio: return "RATIO";
  }
  return "?";
}

VotingScenario parse_voting_scenario(std::string_view s) {
  auto v = to_upper(trim(s));
  std::replace(v.begin(), v.end(), '-', '_');
  if (v == "NO_VOTING" || v == "NONE") return VotingScenario::NoVoting;
  if (v == "MAJORITY") return VotingScenario::Majority;
  if (v == "RATIO") return VotingScenario::Ratio;
  throw DataError("unknown voting scenario '" + std::string(s) + "'");
}

Decision decide(std::span<const Vote> votes, VotingScenario scenario) {
  if (votes.empty()) throw DataError("no votes to combine");
  Decision d;
  const Label top = votes.front().label;
  for (const auto& v : votes) {
    double weight = 0.0;
    switch (scenario) {
      case VotingScenario::NoVoting: weight = &v == &votes.front() ? 1.0 : 0.0; break;
      case VotingScenario::Majority: weight = 1.0; break;
      case VotingScenario::Ratio: weight = std::max(v.score, 0.0); break;
    }
    (v.label == Label::Yes ? d.yes_weight : d.no_weight) += weight;
  }
  if (d.yes_weight > d.no_weight) {
    d.label = Label::Yes;
  } else if (d.no_weight > d.yes_weight) {
    d.label = Label::No;
  } else {
    d.tie = true;
    d.label = top;
  }
  return d;
}

AnswerTrace answer(const QaSystem& system, const QueryCase& qc, VotingScenario scenario,
                   std::size_t k) {
  if (!system.engine || !system.ranker || !system.net || !system.embeddings) {
    throw DataError("answering needs an engine, a rank model, a network and embeddings");
  }
  const auto& engine = *system.engine;
  const auto set = engine.candidates(qc, system.ranker->kinds);
  const auto ranked = retrieve(*system.ranker, set, RetrieveOptions{.ratio = 0.0, .top_k = k});
  if (ranked.entries.empty()) throw DataError("no unit retrieved for case " + qc.id);

  AnswerTrace trace;
  trace.case_id = qc.id;
  for (const auto& e : ranked.entries) {
    const auto pos = engine.units().position(e.unit_id);
    const auto ex = engine.qa_example(qc, *pos);
    const auto in = prepare_qa_input(ex, *system.embeddings, system.aux, engine.models());
    Vote v;
    v.unit_id = e.unit_id;
    v.score = e.score;
    v.probability = system.net->forward(in.input, in.aux);
    v.label = v.probability > kDecisionThreshold ? Label::Yes : Label::No;
    trace.votes.push_back(std::move(v));
  }
  trace.decision = decide(trace.votes, scenario);
  return trace;
}

IrExperiment::IrExperiment(std::vector<CandidateSet> sets, std::vector<FeatureKind> kinds,
                           IrProtocol protocol)
    : sets_(std::move(sets)), kinds_(std::move(kinds)), protocol_(protocol) {}

std::pair<std::vector<CandidateSet>, std::vector<CandidateSet>> IrExperiment::split(
    std::span<const FeatureKind> kinds, std::uint64_t seed) const {
  std::vector<std::size_t> columns;
  for (auto k : kinds) {
    auto it = std::find(kinds_.begin(), kinds_.end(), k);
    if (it == kinds_.end()) {
      throw DataError(std::string(to_string(k)) + " was not computed for this experiment");
    }
    columns.push_back(static_cast<std::size_t>(it - kinds_.begin()));
  }

  std::vector<QueryCase> stubs;
  stubs.reserve(sets_.size());
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    QueryCase qc;
    qc.id = sets_[i].query_id;
    qc.source = std::to_string(i);
    stubs.push_back(std::move(qc));
  }
  const auto [train_cases, test_cases] = split_cases(stubs, protocol_.test_fraction, seed);

  std::pair<std::vector<CandidateSet>, std::vector<CandidateSet>> out;
  for (const auto& qc : train_cases) {
    out.first.push_back(select_columns(sets_[std::stoul(qc.source)], columns));
  }
  for (const auto& qc : test_cases) {
    out.second.push_back(select_columns(sets_[std::stoul(qc.source)], columns));
  }
  return out;
}

double IrExperiment::f1(std::span<const FeatureKind> kinds, std::uint64_t seed,
                        std::optional<double> c) const {
  const auto [train_sets, test_sets] = split(kinds, seed);
  auto sampler = protocol_.sampler;
  sampler.seed = seed;
  auto topts = protocol_.train;
  topts.seed = seed;
  if (c) topts.c = *c;

  const auto model = train(build_pairs(train_sets, sampler), kinds, topts);
  GoldArticles gold;
  std::vector<RankedList> ranked;
  for (const auto& s : test_sets) {
    gold[s.query_id] = s.gold_articles;
    ranked.push_back(retrieve(model, s, protocol_.retrieve));
  }
  return evaluate_ir(ranked, gold, protocol_.averaging).f1;
}

std::string AblationRow::formatted() const {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << mean << " ± " << deviation;
  return ss.str();
}

AblationRow summarize(std::string description, std::vector<FeatureKind> kinds,
                      std::vector<double> values) {
  AblationRow row;
  row.description = std::move(description);
  row.kinds = std::move(kinds);
  row.values = std::move(values);
  if (!row.values.empty()) {
    double s = 0.0;
    for (double v : row.values) s += v;
    row.mean = s / static_cast<double>(row.values.size());
    double var = 0.0;
    for (double v : row.values) var += (v - row.mean) * (v - row.mean);
    row.deviation = std::sqrt(var / static_cast<double>(row.values.size()));
  }
  return row;
}

namespace {

std::vector<double> run_seeds(const SubsetEvaluator& evaluate, std::span<const FeatureKind> kinds,
                              std::span<const std::uint64_t> seeds) {
  std::vector<double> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(evaluate(kinds, s));
  return out;
}

}  // namespace

AblationReport ablate_leave_one_out(const SubsetEvaluator& evaluate,
                                    std::span<const FeatureKind> all,
                                    std::span<const std::uint64_t> seeds) {
  AblationReport report;
  report.mode = "leave-one-out";
  std::vector<FeatureKind> full(all.begin(), all.end());
  report.rows.push_back(summarize("All", full, run_seeds(evaluate, full, seeds)));
  for (auto excluded : all) {
    std::vector<FeatureKind> subset;
    for (auto k : all) {
      if (k != excluded) subset.push_back(k);
    }
    auto values = run_seeds(evaluate, subset, seeds);
    report.rows.push_back(summarize("All \\ {" + std::string(to_string(excluded)) + "}",
                                    std::move(subset), std::move(values)));
  }
  return report;
}

AblationReport ablate_triples(const SubsetEvaluator& evaluate,
                              std::span<const std::vector<FeatureKind>> groups,
                              std::span<const std::uint64_t> seeds) {
  AblationReport report;
  report.mode = "triples";
  for (const auto& g : groups) {
    report.rows.push_back(
        summarize(format_feature_kinds(g, ", "), g, run_seeds(evaluate, g, seeds)));
  }
  return report;
}

AblationReport ablate_c_sweep(const IrExperiment& experiment, std::span<const FeatureKind> kinds,
                              std::span<const double> grid, std::span<const std::uint64_t> seeds) {
  if (grid.empty()) throw DataError("C grid is empty");
  AblationReport report;
  report.mode = "c-sweep";
  for (double c : grid) {
    std::vector<double> values;
    for (auto s : seeds) values.push_back(experiment.f1(kinds, s, c));
    std::ostringstream label;
    label << "C=" << c;
    report.rows.push_back(
        summarize(label.str(), std::vector<FeatureKind>(kinds.begin(), kinds.end()),
                  std::move(values)));
  }
  return report;
}

std::vector<std::vector<FeatureKind>> parse_feature_groups(std::string_view text) {
  std::vector<std::vector<FeatureKind>> out;
  for (const auto& group : split_list(text, ';')) out.push_back(parse_feature_kinds(group));
  if (out.empty()) throw DataError("no feature groups given");
  return out;
}

std::vector<std::vector<FeatureKind>> reported_triples() {
  using K = FeatureKind;
  return {{K::TfidfCosine, K::ManhattanTf, K::JaccardTfidf},
          {K::TfidfCosine, K::EuclideanTf, K::JaccardTfidf},
          {K::LdaCosine, K::ManhattanTf, K::JaccardTfidf},
          {K::LsiCosine, K::ManhattanTf, K::JaccardTfidf}};
}

std::string to_tsv(const AblationReport& report) {
  std::ostringstream ss;
  ss << "# mode\t" << report.mode << "\n";
  ss << "features\tmean_f1\tdeviation\tsummary\tper_seed\n";
  for (const auto& r : report.rows) {
    ss << r.description << '\t' << std::fixed << std::setprecision(6) << r.mean << '\t'
       << r.deviation << '\t' << r.formatted() << '\t';
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      if (i) ss << ',';
      ss << std::setprecision(6) << r.values[i];
    }
    ss << '\n';
  }
  return ss.str();
}

}  // namespace lqa
