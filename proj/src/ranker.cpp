#include "lqa/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "lqa/error.hpp"
#include "lqa/metrics.hpp"
#include "lqa/random.hpp"

namespace lqa {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

FeatureVector make_fv(const std::string& query_id, const Candidate& c) {
  return FeatureVector{query_id, c.unit_id, c.raw, false};
}

}  // namespace

bool CandidateSet::has_relevant() const {
  return std::any_of(units.begin(), units.end(), [](const Candidate& c) { return c.relevant; });
}

CandidateSet select_columns(const CandidateSet& set, std::span<const std::size_t> columns) {
  CandidateSet out;
  out.query_id = set.query_id;
  out.gold_articles = set.gold_articles;
  out.units.reserve(set.units.size());
  for (const auto& c : set.units) {
    Candidate d{c.unit_id, c.parent_id, {}, c.prefilter, c.relevant};
    d.raw.reserve(columns.size());
    for (auto j : columns) d.raw.push_back(c.raw.at(j));
    out.units.push_back(std::move(d));
  }
  return out;
}

std::size_t PairwiseSet::size() const {
  std::size_t n = 0;
  for (const auto& q : queries) n += q.pairs.size();
  return n;
}

PairwiseSet build_pairs(std::span<const CandidateSet> sets, const SamplerConfig& config) {
  PairwiseSet out;
  Rng rng(config.seed);
  for (const auto& set : sets) {
    std::vector<std::size_t> relevant, negatives;
    for (std::size_t i = 0; i < set.units.size(); ++i) {
      (set.units[i].relevant ? relevant : negatives).push_back(i);
    }
    if (relevant.empty()) {
      spdlog::warn("query {} has no relevant unit in the corpus; skipped", set.query_id);
      continue;
    }

    std::sort(negatives.begin(), negatives.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = set.units[a];
      const auto& y = set.units[b];
      if (x.prefilter != y.prefilter) return x.prefilter > y.prefilter;
      return x.unit_id < y.unit_id;
    });
    const std::size_t hard = std::min(config.hard_negatives, negatives.size());
    std::vector<std::size_t> chosen(negatives.begin(),
                                    negatives.begin() + static_cast<std::ptrdiff_t>(hard));
    std::vector<std::size_t> rest(negatives.begin() + static_cast<std::ptrdiff_t>(hard),
                                  negatives.end());
    const std::size_t draws = std::min(config.random_negatives, rest.size());
    for (std::size_t i = 0; i < draws; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(rest.size() - i));
      std::swap(rest[i], rest[j]);
      chosen.push_back(rest[i]);
    }

    QueryPairs qp;
    qp.query_id = set.query_id;
    for (auto r : relevant) {
      for (auto n : chosen) {
        qp.pairs.push_back({make_fv(set.query_id, set.units[r]), make_fv(set.query_id, set.units[n])});
      }
    }
    out.queries.push_back(std::move(qp));
  }
  return out;
}

RankModel train(const PairwiseSet& pairs, std::span<const FeatureKind> kinds,
                const TrainOptions& options) {
  if (!(options.c > 0.0)) throw DataError("trade-off parameter C must be positive");
  if (pairs.size() == 0) throw DataError("cannot train a ranker on an empty pair set");
  const std::size_t dim = kinds.size();

  std::vector<const PairSample*> flat;
  flat.reserve(pairs.size());
  for (const auto& q : pairs.queries) {
    for (const auto& p : q.pairs) {
      for (const auto* fv : {&p.relevant, &p.irrelevant}) {
        if (fv->values.size() != dim) {
          throw DataError("pair (" + p.relevant.unit_id + ", " + p.irrelevant.unit_id +
                          ") of query " + q.query_id + " has the wrong feature count");
        }
        for (double v : fv->values) {
          if (!std::isfinite(v)) {
            throw DataError("non-finite feature value in pair (" + p.relevant.unit_id + ", " +
                            p.irrelevant.unit_id + ") of query " + q.query_id);
          }
        }
      }
      flat.push_back(&p);
    }
  }

  RankModel model;
  model.kinds.assign(kinds.begin(), kinds.end());
  model.c = options.c;
  model.seed = options.seed;
  model.max_epochs = options.epochs;
  model.tolerance = options.tolerance;

  if (options.scale) {
    std::vector<std::vector<double>> rows;
    rows.reserve(flat.size() * 2);
    for (const auto* p : flat) {
      rows.push_back(p->relevant.values);
      rows.push_back(p->irrelevant.values);
    }
    model.scaler = MinMaxScaler::fit(rows);
  }

  auto prepare = [&](const FeatureVector& fv) {
    return model.scaler ? model.scaler->transform(fv.values) : fv.values;
  };
  const std::size_t n = flat.size();
  std::vector<double> diff(n * dim);
  std::vector<double> qii(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = prepare(flat[i]->relevant);
    const auto v = prepare(flat[i]->irrelevant);
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      diff[i * dim + j] = u[j] - v[j];
      sq += diff[i * dim + j] * diff[i * dim + j];
    }
    qii[i] = sq;
  }
  auto row = [&](std::size_t i) { return std::span<const double>(diff.data() + i * dim, dim); };

  auto hinge_sum = [&](std::span<const double> w) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::max(0.0, 1.0 - dot(w, row(i)));
    return s;
  };

  const double c = options.c;
  std::vector<double> w(dim, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double max_step = 0.0;
    for (auto i : order) {
      if (qii[i] == 0.0) continue;
      const auto d = row(i);
      const double g = dot(w, d) - 1.0;
      const double updated = std::clamp(alpha[i] - g / qii[i], 0.0, c);
      const double delta = updated - alpha[i];
      if (delta == 0.0) continue;
      alpha[i] = updated;
      for (std::size_t j = 0; j < dim; ++j) w[j] += delta * d[j];
      max_step = std::max(max_step, std::abs(delta));
    }
    model.objective_history.push_back(0.5 * dot(w, w) + c * hinge_sum(w));
    model.epochs_run = epoch + 1;
    if (max_step <= options.tolerance) break;
  }

  model.w = std::move(w);
  model.training_loss = hinge_sum(model.w);
  model.objective = 0.5 * dot(model.w, model.w) + c * model.training_loss;
  return model;
}

namespace {

void check_width(const RankModel& model, std::size_t n) {
  if (n != model.w.size()) {
    throw DataError("feature vector has " + std::to_string(n) + " values but the model expects " +
                    std::to_string(model.w.size()) + " (" + format_feature_kinds(model.kinds) + ")");
  }
}

}  // namespace

double score_raw(const RankModel& model, std::span<const double> raw) {
  check_width(model, raw.size());
  if (!model.scaler) return dot(model.w, raw);
  return dot(model.w, model.scaler->transform(raw));
}

double score(const RankModel& model, const FeatureVector& fv) {
  if (!fv.scaled) return score_raw(model, fv.values);
  check_width(model, fv.values.size());
  return dot(model.w, fv.values);
}

void sort_ranked(std::vector<ScoredUnit>& entries) {
  std::sort(entries.begin(), entries.end(), [](const ScoredUnit& a, const ScoredUnit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.unit_id < b.unit_id;
  });
}

std::vector<ScoredUnit> cut_ranked(std::vector<ScoredUnit> sorted, const RetrieveOptions& options) {
  if (sorted.empty()) return sorted;
  if (options.top_k) {
    sorted.resize(std::min(*options.top_k, sorted.size()));
    return sorted;
  }
  const double best = sorted.front().score;
  if (best <= 0.0) {
    sorted.resize(1);
    return sorted;
  }
  auto keep_end = std::find_if(sorted.begin(), sorted.end(), [&](const ScoredUnit& e) {
    return !(e.score / best >= options.ratio);
  });
  sorted.erase(keep_end, sorted.end());
  return sorted;
}

RankedList retrieve(const RankModel& model, const CandidateSet& set,
                    const RetrieveOptions& options) {
  if (set.units.empty()) throw DataError("cannot retrieve from an empty corpus");
  RankedList out;
  out.query_id = set.query_id;
  out.entries.reserve(set.units.size());
  for (const auto& c : set.units) {
    out.entries.push_back({c.unit_id, c.parent_id, score_raw(model, c.raw)});
  }
  sort_ranked(out.entries);
  out.entries = cut_ranked(std::move(out.entries), options);
  return out;
}

SweepResult sweep_c(std::span<const CandidateSet> train_sets,
                    std::span<const CandidateSet> validation_sets,
                    std::span<const FeatureKind> kinds, std::span<const double> grid,
                    const SweepOptions& options) {
  if (grid.empty()) throw DataError("C grid is empty");
  const auto pairs = build_pairs(train_sets, options.sampler);

  GoldArticles gold;
  for (const auto& s : validation_sets) gold[s.query_id] = s.gold_articles;

  SweepResult result;
  bool first = true;
  for (double c : grid) {
    auto topts = options.train;
    topts.c = c;
    const auto model = train(pairs, kinds, topts);
    std::vector<RankedList> ranked;
    for (const auto& s : validation_sets) ranked.push_back(retrieve(model, s, options.retrieve));
    const double f1 = evaluate_ir(ranked, gold).f1;
    result.rows.push_back({c, f1});
    if (first || f1 > result.best_f1) {
      result.best_c = c;
      result.best_f1 = f1;
      first = false;
    }
  }
  return result;
}

std::vector<double> c_grid(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw DataError("invalid C grid");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(from + step * static_cast<double>(i));
  return out;
}

}  // namespace lqa
