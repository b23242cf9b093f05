#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lqa/corpus.hpp"
#include "lqa/ranker.hpp"

namespace lqa {

enum class Averaging { Micro, Macro };

struct QueryIr {
  std::string query_id;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct IrMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<QueryIr> per_query;
};

/// 2PR / (P + R), or 0 when P + R is 0.
double f1_score(double precision, double recall);

using GoldArticles = std::map<std::string, std::vector<std::string>, std::less<>>;

/// Article-level precision/recall/F1: a retrieved unit counts as retrieving
/// its parent article. Micro averaging pools TP/FP/FN over queries.
/// Throws DataError for a query missing from `gold`.
IrMetrics evaluate_ir(std::span<const RankedList> results, const GoldArticles& gold,
                      Averaging averaging = Averaging::Micro);

/// Fraction of matching labels. Both maps must hold the same case ids.
double evaluate_qa(const std::map<std::string, Label>& predictions,
                   const std::map<std::string, Label>& gold);

}  // namespace lqa
