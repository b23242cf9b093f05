#include "lqa/metrics.hpp"

#include <algorithm>
#include <set>

#include "lqa/error.hpp"

namespace lqa {

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

IrMetrics evaluate_ir(std::span<const RankedList> results, const GoldArticles& gold,
                      Averaging averaging) {
  IrMetrics m;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& r : results) {
    auto it = gold.find(r.query_id);
    if (it == gold.end()) throw DataError("query '" + r.query_id + "' has no gold articles");
    const std::set<std::string> truth(it->second.begin(), it->second.end());
    std::set<std::string> retrieved;
    for (const auto& e : r.entries) retrieved.insert(e.parent_id);

    QueryIr q;
    q.query_id = r.query_id;
    for (const auto& a : retrieved) (truth.contains(a) ? q.tp : q.fp)++;
    for (const auto& a : truth) {
      if (!retrieved.contains(a)) ++q.fn;
    }
    q.precision = q.tp + q.fp ? static_cast<double>(q.tp) / static_cast<double>(q.tp + q.fp) : 0.0;
    q.recall = q.tp + q.fn ? static_cast<double>(q.tp) / static_cast<double>(q.tp + q.fn) : 0.0;
    q.f1 = f1_score(q.precision, q.recall);
    tp += q.tp;
    fp += q.fp;
    fn += q.fn;
    m.per_query.push_back(std::move(q));
  }

  if (averaging == Averaging::Micro) {
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
  } else if (!m.per_query.empty()) {
    for (const auto& q : m.per_query) {
      m.precision += q.precision;
      m.recall += q.recall;
      m.f1 += q.f1;
    }
    const auto n = static_cast<double>(m.per_query.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
  }
  return m;
}

double evaluate_qa(const std::map<std::string, Label>& predictions,
                   const std::map<std::string, Label>& gold) {
  if (predictions.empty()) throw DataError("no predictions to evaluate");
  if (predictions.size() != gold.size()) {
    throw DataError("prediction and gold case sets differ in size");
  }
  std::size_t correct = 0;
  for (const auto& [id, label] : predictions) {
    auto it = gold.find(id);
    if (it == gold.end()) throw DataError("case '" + id + "' has no gold label");
    if (it->second == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace lqa
