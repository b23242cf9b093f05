#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lqa/error.hpp"
#include "lqa/persist.hpp"
#include "lqa/pipeline.hpp"
#include "support/builders.hpp"

namespace lqa {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("lqa_persist_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

TEST(Persist, CorpusRoundTrip) {
  CorpusStore store;
  store.articles = testing::fixture_articles();
  store.split = split_articles(store.articles);
  store.cases = testing::fixture_cases();
  store.config = {{"seed", "42"}};
  TempDir dir;
  save_corpus(dir.file("corpus.json"), store);
  const auto back = load_corpus(dir.file("corpus.json"));
  EXPECT_EQ(back.articles, store.articles);
  EXPECT_EQ(back.split.units, store.split.units);
  EXPECT_EQ(back.split.skipped_ids, store.split.skipped_ids);
  EXPECT_EQ(back.cases, store.cases);
  EXPECT_EQ(back.config, store.config);
  EXPECT_EQ(dump_corpus(back), dump_corpus(store));
}

TEST(Persist, IndexRoundTripGivesIdenticalProjections) {
  const auto cfg = NormalizerConfig::english();
  const auto split = split_articles(testing::fixture_articles());
  std::vector<TermSequence> docs;
  for (const auto& u : split.units) docs.push_back(preprocess(u.text, cfg));
  IndexOptions o;
  o.lsi.k = 12;
  o.lda.k = 4;
  o.lda.iterations = 30;
  IndexArtifact art{cfg, build_index(docs, o), {{"lsi-dims", "12"}}};
  const auto back = parse_index(dump_index(art));

  EXPECT_EQ(back.models.vocab.terms().size(), art.models.vocab.size());
  EXPECT_EQ(back.normalizer.stopwords, cfg.stopwords);
  EXPECT_EQ(back.normalizer.lemma_map, cfg.lemma_map);
  EXPECT_EQ(back.models.lsi->projection, art.models.lsi->projection);
  EXPECT_EQ(back.models.lda->topic_term, art.models.lda->topic_term);
  const std::vector<FeatureKind> kinds(kAllFeatureKinds.begin(), kAllFeatureKinds.end());
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(feature_vector(docs[i], docs[i + 10], kinds, art.models).values,
              feature_vector(docs[i], docs[i + 10], kinds, back.models).values);
  }
  EXPECT_EQ(dump_index(back), dump_index(art));
}

TEST(Persist, RankerRoundTripExactWeights) {
  const std::vector<FeatureKind> kinds = {FeatureKind::TfidfCosine, FeatureKind::ManhattanTf,
                                          FeatureKind::JaccardTfidf};
  const auto sets = testing::separable_sets(5, 20, 6);
  RankerArtifact art{train(build_pairs(sets, {}), kinds, {}), {{"c", "600"}}};
  const auto back = parse_ranker(dump_ranker(art));
  EXPECT_EQ(back.model.w, art.model.w);
  EXPECT_EQ(back.model.kinds, kinds);
  EXPECT_EQ(back.model.scaler->min, art.model.scaler->min);
  EXPECT_EQ(back.model.objective_history, art.model.objective_history);
  for (const auto& c : sets[0].units) EXPECT_EQ(score_raw(back.model, c.raw), score_raw(art.model, c.raw));
}

TEST(Persist, QaRoundTripSameOutputs) {
  const auto toy = testing::separable_qa(6, 9);
  QaTrainOptions o;
  o.restarts = 2;
  o.epochs = 3;
  o.validation_fraction = 0.0;
  const auto trained = train_qa(toy.inputs, toy.shape, o);
  QaArtifact art;
  art.net = trained.net;
  art.aux = {AuxMode::None, AuxMode::Scalar, AuxSides::Both};
  art.options = o;
  art.restarts = trained.restarts;
  art.chosen = trained.chosen;
  art.embeddings_path = "vectors.txt";
  TempDir dir;
  save_qa(dir.file("qa.json"), art);
  const auto back = load_qa(dir.file("qa.json"));
  EXPECT_EQ(back.net.shape(), toy.shape);
  EXPECT_EQ(back.embeddings_path, "vectors.txt");
  EXPECT_EQ(back.restarts.size(), 2u);
  for (const auto& in : toy.inputs) {
    EXPECT_NEAR(back.net.forward(in.input, in.aux), art.net.forward(in.input, in.aux), 1e-12);
  }
}

TEST(Persist, VersionMismatchAndMissingFile) {
  RankerArtifact art;
  art.model.kinds = {FeatureKind::TfidfCosine};
  art.model.w = {1.0};
  auto text = dump_ranker(art);
  const auto pos = text.find("lqa-ranker/1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "lqa-ranker/9");
  try {
    parse_ranker(text);
    FAIL();
  } catch (const VersionError& e) {
    EXPECT_NE(std::string(e.what()).find("lqa-ranker/9"), std::string::npos);
  }
  EXPECT_THROW(parse_index(dump_ranker(art)), VersionError);
  EXPECT_THROW(parse_ranker("{not json"), DataError);

  try {
    load_ranker("/nonexistent/ranker.json");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/ranker.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace lqa
