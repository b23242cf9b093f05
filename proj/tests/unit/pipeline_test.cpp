#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lqa/error.hpp"
#include "lqa/pipeline.hpp"
#include "support/builders.hpp"

namespace lqa {
namespace {

using K = FeatureKind;

std::vector<Vote> votes_from(unsigned pattern, std::span<const double> scores) {
  std::vector<Vote> v;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    Vote x;
    x.unit_id = "u" + std::to_string(i);
    x.score = scores[i];
    x.label = (pattern >> i) & 1u ? Label::Yes : Label::No;
    v.push_back(x);
  }
  return v;
}

TEST(Decide, TruthTableOverFiveVotes) {
  const std::vector<double> scores = {2.0, 1.5, 1.0, -0.5, 0.5};
  for (unsigned p = 0; p < 32; ++p) {
    const auto votes = votes_from(p, scores);
    const Label top = votes[0].label;

    EXPECT_EQ(decide(votes, VotingScenario::NoVoting).label, top);

    int yes = 0;
    double yes_w = 0, no_w = 0;
    for (const auto& v : votes) {
      yes += v.label == Label::Yes;
      (v.label == Label::Yes ? yes_w : no_w) += std::max(v.score, 0.0);
    }
    EXPECT_EQ(decide(votes, VotingScenario::Majority).label, yes >= 3 ? Label::Yes : Label::No) << p;

    const auto r = decide(votes, VotingScenario::Ratio);
    const Label expect = yes_w > no_w ? Label::Yes : no_w > yes_w ? Label::No : top;
    EXPECT_EQ(r.label, expect) << p;
    EXPECT_DOUBLE_EQ(r.yes_weight, yes_w);
    EXPECT_DOUBLE_EQ(r.no_weight, no_w);
  }
}

TEST(Decide, ScenariosDisagree) {
  std::vector<Vote> v = {{"a", 2.6, Label::Yes, 0.9}, {"b", 1.0, Label::No, 0.1}, {"c", 1.0, Label::No, 0.2}};
  EXPECT_EQ(decide(v, VotingScenario::NoVoting).label, Label::Yes);
  EXPECT_EQ(decide(v, VotingScenario::Majority).label, Label::No);
  EXPECT_EQ(decide(v, VotingScenario::Ratio).label, Label::Yes);
}

TEST(Decide, UnanimityAndTies) {
  for (auto s : {VotingScenario::NoVoting, VotingScenario::Majority, VotingScenario::Ratio}) {
    std::vector<Vote> all_no = {{"a", 1, Label::No, 0}, {"b", 0.5, Label::No, 0}};
    EXPECT_EQ(decide(all_no, s).label, Label::No);
    std::vector<Vote> all_yes = {{"a", 1, Label::Yes, 1}, {"b", 0.5, Label::Yes, 1}};
    EXPECT_EQ(decide(all_yes, s).label, Label::Yes);
  }
  std::vector<Vote> tie = {{"a", 1, Label::No, 0}, {"b", 1, Label::Yes, 1}};
  const auto d = decide(tie, VotingScenario::Majority);
  EXPECT_TRUE(d.tie);
  EXPECT_EQ(d.label, Label::No);
  std::vector<Vote> negative = {{"a", -1, Label::Yes, 1}, {"b", -2, Label::No, 0}};
  EXPECT_TRUE(decide(negative, VotingScenario::Ratio).tie);
  EXPECT_EQ(decide(negative, VotingScenario::Ratio).label, Label::Yes);
  EXPECT_THROW(decide(std::vector<Vote>{}, VotingScenario::Ratio), DataError);
}

TEST(Decide, ScenarioNames) {
  EXPECT_EQ(parse_voting_scenario("no-voting"), VotingScenario::NoVoting);
  EXPECT_EQ(parse_voting_scenario("none"), VotingScenario::NoVoting);
  EXPECT_EQ(parse_voting_scenario(to_string(VotingScenario::Ratio)), VotingScenario::Ratio);
  EXPECT_THROW(parse_voting_scenario("plurality"), DataError);
}

std::vector<QueryCase> stub_cases(std::size_t n) {
  std::vector<QueryCase> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"c" + std::to_string(i), "", {}, Label::No, ""});
  return out;
}

TEST(SplitCases, PartitionSizesAndDeterminism) {
  const auto cases = stub_cases(40);
  const auto [train, test] = split_cases(cases, 0.2, 42);
  EXPECT_EQ(test.size(), 8u);
  EXPECT_EQ(train.size(), 32u);
  std::set<std::string> ids;
  for (const auto& c : train) ids.insert(c.id);
  for (const auto& c : test) ids.insert(c.id);
  EXPECT_EQ(ids.size(), 40u);
  EXPECT_EQ(split_cases(cases, 0.2, 42).second, test);
  EXPECT_NE(split_cases(cases, 0.2, 43).second, test);

  auto shuffled = cases;
  std::reverse(shuffled.begin(), shuffled.end());
  std::set<std::string> a, b;
  for (const auto& c : test) a.insert(c.id);
  for (const auto& c : split_cases(shuffled, 0.2, 42).second) b.insert(c.id);
  EXPECT_EQ(a, b);
}

TEST(SplitCases, SmallInputs) {
  EXPECT_EQ(split_cases(stub_cases(2), 0.0, 1).second.size(), 1u);
  EXPECT_EQ(split_cases(stub_cases(2), 1.0, 1).first.size(), 1u);
  EXPECT_EQ(split_cases(stub_cases(1), 0.2, 1).first.size(), 1u);
}

class FixtureEngine : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto cfg = NormalizerConfig::english();
    UnitIndex units(split_articles(testing::fixture_articles()));
    std::vector<TermSequence> terms;
    for (const auto& u : units.units()) terms.push_back(preprocess(u.text, cfg));
    IndexOptions o;
    o.lsi.k = 10;
    o.lda.k = 6;
    o.lda.iterations = 40;
    engine_ = new Engine(std::move(units), build_index(terms, o), cfg);
    cases_ = testing::fixture_cases();
  }
  static void TearDownTestSuite() { delete engine_; }

  static const QueryCase& find_case(const std::string& id) {
    return *std::find_if(cases_.begin(), cases_.end(), [&](const QueryCase& c) { return c.id == id; });
  }

  static Engine* engine_;
  static std::vector<QueryCase> cases_;
};

Engine* FixtureEngine::engine_ = nullptr;
std::vector<QueryCase> FixtureEngine::cases_;

TEST_F(FixtureEngine, CandidatesCoverCorpusAndMarkGoldUnits) {
  const auto& qc = find_case("H19-1-1");
  const std::vector<K> kinds(kAllFeatureKinds.begin(), kAllFeatureKinds.end());
  const auto set = engine_->candidates(qc, kinds);
  EXPECT_EQ(set.units.size(), 54u);
  std::set<std::string> relevant;
  for (const auto& c : set.units) {
    EXPECT_EQ(c.raw.size(), 6u);
    if (c.relevant) relevant.insert(c.unit_id);
  }
  EXPECT_EQ(relevant, (std::set<std::string>{"648(1)", "648(2)", "648(3)"}));
  EXPECT_EQ(set.gold_articles, (std::vector<std::string>{"648"}));
}

TEST_F(FixtureEngine, BestGoldUnitAndQaExample) {
  const auto& qc = find_case("H18-1-1");
  const auto pos = engine_->best_gold_unit(qc);
  ASSERT_TRUE(pos);
  EXPECT_EQ(engine_->units()[*pos].parent_id, "233");
  const auto ex = engine_->qa_example(qc, *pos);
  EXPECT_EQ(ex.id, qc.id);
  EXPECT_EQ(ex.label, qc.label);
  EXPECT_FALSE(ex.sentence.empty());

  QueryCase orphan = qc;
  orphan.relevant_ids = {"398-22"};
  EXPECT_FALSE(engine_->best_gold_unit(orphan));
  const std::vector<QueryCase> both = {qc, orphan};
  EXPECT_EQ(build_qa_examples(*engine_, both).size(), 1u);
}

TEST_F(FixtureEngine, AnswerTraceMatchesRetrieval) {
  const std::vector<K> kinds = {K::TfidfCosine, K::ManhattanTf, K::JaccardTfidf};
  const auto [train_cases, test_cases] = split_cases(cases_, 0.2, 42);
  const auto model = train(build_pairs(engine_->candidates(train_cases, kinds), {}), kinds, {});
  const auto table = EmbeddingTable::load(testing::fixture_path("embeddings.txt"));
  NetShape shape;
  shape.embedding_dim = table.dim();
  shape.filters = 2;
  shape.pool = 8;
  shape.hidden1 = 4;
  shape.hidden2 = 4;
  EntailmentNet net(shape);
  net.init_uniform(1, 0.5);
  QaSystem sys{engine_, &model, &net, &table, AuxConfig{AuxMode::None, AuxMode::None, AuxSides::Both}};

  for (const auto& qc : test_cases) {
    const auto trace = answer(sys, qc, VotingScenario::Ratio, 5);
    const auto ranked = retrieve(model, engine_->candidates(qc, kinds), {0.85, 5});
    ASSERT_EQ(trace.votes.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(trace.votes[i].unit_id, ranked.entries[i].unit_id);
      EXPECT_EQ(trace.votes[i].score, ranked.entries[i].score);
      EXPECT_EQ(trace.votes[i].label == Label::Yes, trace.votes[i].probability > 0.5);
    }
    EXPECT_EQ(trace.decision.label, decide(trace.votes, VotingScenario::Ratio).label);
  }
  QaSystem broken = sys;
  broken.net = nullptr;
  EXPECT_THROW(answer(broken, cases_[0], VotingScenario::Ratio), DataError);
}

TEST(Ablation, SummarizeAndFormat) {
  const auto row = summarize("x", {}, {0.6, 0.61, 0.599, 0.605, 0.6});
  EXPECT_NEAR(row.mean, 0.6028, 1e-12);
  EXPECT_NEAR(row.deviation, std::sqrt(8.68e-5 / 5), 1e-12);
  EXPECT_EQ(row.formatted(), "0.603 ± 0.004");
  const auto empty = summarize("e", {}, {});
  EXPECT_EQ(empty.mean, 0.0);
}

TEST(Ablation, LeaveOneOutRowsAndNoiseFeature) {
  // Feature 0 separates relevant units; the others are noise.
  const std::vector<K> kinds = {K::TfidfCosine, K::ManhattanTf, K::JaccardTfidf};
  const IrExperiment exp(testing::separable_sets(30, 40, 8), kinds, {});
  const SubsetEvaluator eval = [&](std::span<const K> k, std::uint64_t s) { return exp.f1(k, s); };
  const std::vector<std::uint64_t> seeds = {1, 2};
  const auto report = ablate_leave_one_out(eval, kinds, seeds);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_EQ(report.rows[0].description, "All");
  EXPECT_EQ(report.rows[1].description, "All \\ {TFIDF_COSINE}");
  EXPECT_EQ(report.rows[1].kinds, (std::vector<K>{K::ManhattanTf, K::JaccardTfidf}));
  EXPECT_EQ(report.rows[0].values.size(), 2u);
  // Dropping the separating feature costs the most.
  EXPECT_LT(report.rows[1].mean, report.rows[0].mean);
  EXPECT_LT(report.rows[1].mean, report.rows[2].mean);
  EXPECT_LT(report.rows[1].mean, report.rows[3].mean);
}

TEST(Ablation, TriplesAndCSweep) {
  const std::vector<K> kinds(kAllFeatureKinds.begin(), kAllFeatureKinds.end());
  const std::vector<std::uint64_t> seeds = {3};
  int calls = 0;
  const SubsetEvaluator eval = [&](std::span<const K> k, std::uint64_t) {
    ++calls;
    return static_cast<double>(k.size());
  };
  const auto groups = reported_triples();
  const auto t = ablate_triples(eval, groups, seeds);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(t.rows[3].description, "LSI_COSINE, MANHATTAN_TF, JACCARD_TFIDF");

  const std::vector<K> three = {K::TfidfCosine, K::ManhattanTf, K::JaccardTfidf};
  const IrExperiment exp(testing::separable_sets(10, 20, 5), three, {});
  const auto grid = c_grid(100, 2000, 100);
  const auto c = ablate_c_sweep(exp, three, grid, seeds);
  ASSERT_EQ(c.rows.size(), 20u);
  EXPECT_EQ(c.rows[0].description, "C=100");
  EXPECT_EQ(c.rows[19].description, "C=2000");

  const auto tsv = to_tsv(c);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 22);
  EXPECT_EQ(tsv.rfind("# mode\tc-sweep\n", 0), 0u);
}

TEST(Ablation, ExperimentRejectsUncomputedKind) {
  const std::vector<K> three = {K::TfidfCosine, K::ManhattanTf, K::JaccardTfidf};
  const IrExperiment exp(testing::separable_sets(5, 10, 5), three, {});
  const std::vector<K> lsi = {K::LsiCosine};
  EXPECT_THROW(exp.f1(lsi, 1), DataError);
}

TEST(FeatureGroups, Parse) {
  const auto g = parse_feature_groups("TFIDF,MANHATTAN,JACCARD; LSI,MANHATTAN,JACCARD");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[1][0], K::LsiCosine);
  EXPECT_THROW(parse_feature_groups("TFIDF,BOGUS"), DataError);
  EXPECT_THROW(parse_feature_groups(""), DataError);
}

}  // namespace
}  // namespace lqa
