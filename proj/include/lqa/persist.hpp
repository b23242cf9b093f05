#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lqa/corpus.hpp"
#include "lqa/entailment.hpp"
#include "lqa/ranker.hpp"
#include "lqa/simfeatures.hpp"
#include "lqa/textpipe.hpp"

namespace lqa {

inline constexpr std::string_view kCorpusFormat = "lqa-corpus/1";
inline constexpr std::string_view kIndexFormat = "lqa-index/1";
inline constexpr std::string_view kRankerFormat = "lqa-ranker/1";
inline constexpr std::string_view kQaFormat = "lqa-qa/1";

/// Settings echoed into an artifact, key -> value.
using ConfigEcho = std::map<std::string, std::string>;

struct CorpusStore {
  std::vector<Article> articles;
  SplitResult split;
  std::vector<QueryCase> cases;
  bool split_paragraphs = true;
  bool expand_references = false;
  ConfigEcho config;
};

struct IndexArtifact {
  NormalizerConfig normalizer;
  IndexModels models;
  ConfigEcho config;
};

struct RankerArtifact {
  RankModel model;
  ConfigEcho config;
};

struct QaArtifact {
  EntailmentNet net;
  AuxConfig aux;
  QaTrainOptions options;
  std::vector<RestartRecord> restarts;
  std::size_t chosen = 0;
  std::string embeddings_path;
  ConfigEcho config;
};

// All artifacts are JSON documents with a "format" field. Loading throws
// DataError when the file is missing or malformed and VersionError when
// the format string differs from the expected one.

void save_corpus(const std::string& path, const CorpusStore& store);
CorpusStore load_corpus(const std::string& path);

void save_index(const std::string& path, const IndexArtifact& index);
IndexArtifact load_index(const std::string& path);

void save_ranker(const std::string& path, const RankerArtifact& ranker);
RankerArtifact load_ranker(const std::string& path);

void save_qa(const std::string& path, const QaArtifact& qa);
QaArtifact load_qa(const std::string& path);

/// In-memory forms of the above, used by the file functions.
std::string dump_corpus(const CorpusStore& store);
CorpusStore parse_corpus(std::string_view text);
std::string dump_index(const IndexArtifact& index);
IndexArtifact parse_index(std::string_view text);
std::string dump_ranker(const RankerArtifact& ranker);
RankerArtifact parse_ranker(std::string_view text);
std::string dump_qa(const QaArtifact& qa);
QaArtifact parse_qa(std::string_view text);

}  // namespace lqa
