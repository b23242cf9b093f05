// Acceptance run: one PASS/FAIL/SKIP line per criterion, non-zero exit on
// any failure. Set LQA_COLIEE_DIR to a directory holding the civil code
// (civil_code*.txt) and the query XML files to enable the real-data checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "lqa/entailment.hpp"
#include "lqa/metrics.hpp"
#include "lqa/pipeline.hpp"
#include "lqa/ranker.hpp"
#include "lqa/simfeatures.hpp"
#include "lqa/strings.hpp"
#include "lqa/vectorspace.hpp"
#include "support/builders.hpp"

using namespace lqa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum { Pass, Fail, Skip } status = Pass;
  std::string detail;
};

/// Collects failed expectations; the first few are reported.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) msgs_ << (msgs_.tellp() > 0 ? "; " : "") << what;
  }
  Outcome outcome(std::string pass_detail) const {
    if (failures_ == 0) return {Outcome::Pass, std::move(pass_detail)};
    return {Outcome::Fail, std::to_string(failures_) + " failure(s): " + msgs_.str()};
  }

 private:
  std::size_t failures_ = 0;
  std::ostringstream msgs_;
};

std::string num(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

std::optional<fs::path> coliee_dir() {
  const char* env = std::getenv("LQA_COLIEE_DIR");
  if (!env || !*env || !fs::is_directory(env)) return std::nullopt;
  return fs::path(env);
}

struct RealData {
  std::vector<Article> articles;
  std::vector<QueryCase> cases;
};

std::optional<RealData> load_real_data() {
  const auto dir = coliee_dir();
  if (!dir) return std::nullopt;
  RealData d;
  std::vector<fs::path> xml;
  for (const auto& e : fs::recursive_directory_iterator(*dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (e.path().extension() == ".xml") xml.push_back(e.path());
    if (d.articles.empty() && e.path().extension() == ".txt" && name.find("civil") != std::string::npos) {
      d.articles = parse_civil_code(read_file(e.path().string()));
    }
  }
  std::sort(xml.begin(), xml.end());
  for (const auto& p : xml) {
    auto c = parse_query_file(read_file(p.string()), p.stem().string());
    d.cases.insert(d.cases.end(), c.begin(), c.end());
  }
  if (d.articles.empty() || d.cases.empty()) return std::nullopt;
  return d;
}

// ---------------------------------------------------------------------------

Outcome splitting_fixture() {
  Check c;
  const auto articles = testing::fixture_articles();
  const auto split = split_articles(articles);
  const UnitIndex index(split);
  const auto p1 = index.position("233(1)");
  const auto p2 = index.position("233(2)");
  c.expect(p1 && p2, "233(1)/233(2) missing");
  if (p1 && p2) {
    c.expect(index[*p1].text == testing::kArticle233Paragraph1, "233(1) text differs");
    c.expect(index[*p2].text == testing::kArticle233Paragraph2, "233(2) text differs");
  }
  c.expect(!index.position("233"), "unsplit 233 present");
  c.expect(split.units.size() == 54 && split.skipped_ids == std::vector<std::string>{"398-22"},
           "fixture counts differ");

  std::string detail = "233(1), 233(2) exact; fixture 36 articles -> 54 units";
  if (auto real = load_real_data()) {
    const auto rs = split_articles(real->articles);
    std::size_t singles = 0;
    for (const auto& a : real->articles) singles += a.paragraphs.size() == 1;
    c.expect(real->articles.size() == 1105, "real articles " + std::to_string(real->articles.size()));
    c.expect(singles == 682, "real single-paragraph " + std::to_string(singles));
    c.expect(rs.skipped_ids.size() == 7, "real empty " + std::to_string(rs.skipped_ids.size()));
    c.expect(rs.units.size() == 1663, "real units " + std::to_string(rs.units.size()));
    detail += "; real-data counts checked";
  }
  return c.outcome(detail);
}

double brute_jaccard(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::min(a[i], b[i]);
    den += std::max(a[i], b[i]);
  }
  return den == 0 ? 1.0 : num / den;
}

Outcome jaccard_oracle() {
  Check c;
  Rng rng(1000);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto dim = static_cast<std::uint32_t>(1 + rng.below(80));
    const double density = rng.uniform(0.05, 0.9);
    const auto a = testing::random_sparse(rng, dim, density);
    const auto b = testing::random_sparse(rng, dim, density);
    const double j = generalized_jaccard(a, b);
    const double err = std::abs(j - brute_jaccard(a.to_dense(dim), b.to_dense(dim)));
    worst = std::max(worst, err);
    c.expect(err <= 1e-12, "pair " + std::to_string(i) + " error " + num(err));
    c.expect(j >= 0.0 && j <= 1.0, "pair " + std::to_string(i) + " out of [0,1]");
    c.expect(j == generalized_jaccard(b, a), "pair " + std::to_string(i) + " asymmetric");
    c.expect(jaccard_distance(a, b) == 1.0 - j, "pair " + std::to_string(i) + " distance");
  }
  return c.outcome("1000 pairs, max error " + num(worst, 3));
}

Outcome svd_properties() {
  Check c;
  Rng rng(77);
  double worst_fro = 0.0, worst_lin = 0.0;
  for (int trial = 0; trial < 12; ++trial) {
    const auto rows = static_cast<Eigen::Index>(20 + rng.below(181));
    const auto cols = static_cast<Eigen::Index>(20 + rng.below(181));
    const auto r = static_cast<Eigen::Index>(1 + rng.below(10));
    Eigen::MatrixXd left(rows, r), right(r, cols);
    for (Eigen::Index i = 0; i < left.size(); ++i) left.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = rng.normal();
    const Eigen::MatrixXd a = left * right;

    std::vector<SparseVector> docs;
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::vector<double> row(static_cast<std::size_t>(cols));
      for (Eigen::Index j = 0; j < cols; ++j) row[static_cast<std::size_t>(j)] = a(i, j);
      docs.push_back(SparseVector::from_dense(row));
    }
    LsiOptions o;
    o.k = static_cast<std::size_t>(r);
    o.seed = static_cast<std::uint64_t>(trial);
    const auto m = fit_lsi(docs, static_cast<std::size_t>(cols), o);
    const Eigen::MatrixXd& v = m.projection;
    const double fro = (a - a * v * v.transpose()).norm();
    worst_fro = std::max(worst_fro, fro);
    c.expect(fro <= 1e-6, "trial " + std::to_string(trial) + " reconstruction " + num(fro));
    for (Eigen::Index i = 1; i < m.singular_values.size(); ++i) {
      c.expect(m.singular_values[i] <= m.singular_values[i - 1], "singular values increase");
    }

    for (int t = 0; t < 5; ++t) {
      const auto x = testing::random_sparse(rng, static_cast<std::uint32_t>(cols), 0.3);
      const auto y = testing::random_sparse(rng, static_cast<std::uint32_t>(cols), 0.3);
      const double alpha = rng.uniform(-3, 3), beta = rng.uniform(-3, 3);
      std::vector<std::pair<std::uint32_t, double>> combo;
      const auto xd = x.to_dense(static_cast<std::size_t>(cols));
      const auto yd = y.to_dense(static_cast<std::size_t>(cols));
      for (std::uint32_t j = 0; j < xd.size(); ++j) {
        const double w = alpha * xd[j] + beta * yd[j];
        if (w != 0.0) combo.emplace_back(j, w);
      }
      const auto pz = project_lsi(SparseVector::from_pairs(combo), m);
      const auto px = project_lsi(x, m), py = project_lsi(y, m);
      for (std::size_t j = 0; j < pz.size(); ++j) {
        const double err = std::abs(pz[j] - (alpha * px[j] + beta * py[j]));
        worst_lin = std::max(worst_lin, err);
        c.expect(err <= 1e-9, "linearity error " + num(err));
      }
    }
  }
  return c.outcome("12 random low-rank matrices, max Frobenius error " + num(worst_fro, 3) +
                   ", max linearity error " + num(worst_lin, 3));
}

Outcome ranking_oracle() {
  Check c;
  const std::vector<FeatureKind> kinds = {FeatureKind::TfidfCosine, FeatureKind::ManhattanTf,
                                          FeatureKind::JaccardTfidf};
  const auto sets = testing::separable_sets(20, 50, 2016);
  const auto model = train(build_pairs(sets, {}), kinds, {});

  const auto all = testing::all_pairs(sets);
  std::size_t total = 0, correct = 0;
  for (const auto& q : all.queries) {
    for (const auto& p : q.pairs) {
      ++total;
      correct += score(model, p.relevant) > score(model, p.irrelevant);
    }
  }
  c.expect(correct == total, std::to_string(correct) + "/" + std::to_string(total) + " pairs ordered");

  for (const auto& s : sets) {
    const auto got = retrieve(model, s, {0.85, std::nullopt});
    double best = -1e300;
    for (const auto& u : s.units) best = std::max(best, score_raw(model, u.raw));
    std::set<std::string> expect, have;
    for (const auto& u : s.units) {
      const double v = score_raw(model, u.raw);
      if (best > 0 ? v / best >= 0.85 : v == best) expect.insert(u.unit_id);
    }
    for (const auto& e : got.entries) have.insert(e.unit_id);
    if (best > 0) {
      c.expect(have == expect, s.query_id + " retrieved set differs from ratio filter");
    } else {
      c.expect(have.size() == 1 && expect.contains(*have.begin()), s.query_id + " non-positive top");
    }
  }
  return c.outcome(std::to_string(correct) + "/" + std::to_string(total) +
                   " pairs ordered; 20 retrieved sets match the ratio filter");
}

Outcome threshold_semantics() {
  Check c;
  auto run = [](double a) {
    std::vector<ScoredUnit> v = {{"a", "a", 2.6 * a}, {"b", "b", 2.3 * a}, {"c", "c", 2.0 * a}};
    sort_ranked(v);
    std::vector<std::string> ids;
    for (const auto& e : cut_ranked(v, {0.85, std::nullopt})) ids.push_back(e.unit_id);
    return ids;
  };
  const std::vector<std::string> want = {"a", "b"};
  c.expect(run(1.0) == want, "base case");
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double a = std::exp(rng.uniform(-20, 20));
    c.expect(run(a) == want, "alpha " + num(a));
  }
  return c.outcome("{2.6, 2.3, 2.0} keeps the first two under 201 positive scalings");
}

Outcome cnn_shape_chain() {
  Check c;
  const NetShape s;
  c.expect(s.input_length() == 400, "input length");
  c.expect(s.filters == 10 && s.map_length() == 399, "maps");
  c.expect(s.pooled_per_map() == 4 && s.pooled_width() == 40, "pooling");
  EntailmentNet net(s);
  net.init_uniform(1, 0.05);
  const std::vector<double> x(400, 0.2);
  const auto t = net.trace(x, {});
  c.expect(t.maps.size() == 10, "trace maps");
  for (const auto& m : t.maps) c.expect(m.size() == 399, "map length");
  c.expect(t.hidden_input.size() == 40 && t.h1.size() == 200 && t.h2.size() == 200, "hidden sizes");
  c.expect(t.output > 0.0 && t.output < 1.0, "output range");

  NetShape with_aux = s;
  with_aux.aux_width = 3;
  EntailmentNet aux_net(with_aux);
  c.expect(aux_net.trace(x, std::vector<double>(3, 0.1)).hidden_input.size() == 43, "aux appended");
  c.expect(aux_net.params().w1.size() == 200 * 43 && aux_net.params().w3.size() == 200, "weight sizes");
  return c.outcome("400 -> 10x399 -> 10x4 -> 40(+aux) -> 200 -> 200 -> 1");
}

Outcome gradient_check() {
  Check c;
  NetShape s;
  s.embedding_dim = 4;
  s.filters = 2;
  s.filter_length = 2;
  s.pool = 2;
  s.aux_width = 1;
  s.hidden1 = 3;
  s.hidden2 = 3;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EntailmentNet net(s);
    net.init_uniform(seed, 0.8);
    Rng rng(seed * 31);
    std::vector<double> x(8);
    for (auto& v : x) v = rng.normal();
    const std::vector<double> aux = {rng.uniform()};
    const double target = static_cast<double>(seed % 2);
    auto grad = NetParams::zeros(s);
    net.loss_and_gradient(x, aux, target, grad);
    const auto analytic = std::as_const(grad).blocks();
    auto params = net.params().blocks();
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (std::size_t j = 0; j < params[b].size(); ++j) {
        const double keep = params[b][j];
        params[b][j] = keep + 1e-4;
        const double up = net.loss(x, aux, target);
        params[b][j] = keep - 1e-4;
        const double down = net.loss(x, aux, target);
        params[b][j] = keep;
        const double numeric = (up - down) / 2e-4;
        const double rel = std::abs(numeric - analytic[b][j]) /
                           std::max({std::abs(numeric), std::abs(analytic[b][j]), 1e-8});
        worst = std::max(worst, rel);
        ++checked;
        c.expect(rel < 1e-3, std::string(NetParams::kBlockNames[b]) + "[" + std::to_string(j) +
                                 "] relative error " + num(rel));
      }
    }
  }
  return c.outcome(std::to_string(checked) + " parameters, max relative error " + num(worst, 3));
}

Outcome qa_trainability() {
  Check c;
  const auto toy = testing::separable_qa(20, 1);
  const auto one = train_qa(toy.inputs, toy.shape, testing::separable_qa_options());
  c.expect(one.restarts.at(0).training_accuracy == 1.0,
           "single restart training accuracy " + num(one.restarts.at(0).training_accuracy));

  const auto larger = testing::separable_qa(40, 2);
  QaTrainOptions o;
  o.restarts = 10;
  o.learning_rate = 0.5;
  o.batch_size = 8;
  o.epochs = 40;
  o.patience = 10;
  o.validation_fraction = 0.25;
  const auto a = train_qa(larger.inputs, larger.shape, o);
  const auto b = train_qa(larger.inputs, larger.shape, o);
  double best = -1.0;
  for (const auto& r : a.restarts) best = std::max(best, r.validation_accuracy);
  c.expect(a.restarts.size() == 10, "restart count");
  c.expect(a.restarts[a.chosen].validation_accuracy == best, "chosen restart is not the best");
  c.expect(accuracy(a.net, std::span<const QaInput>(larger.inputs)) >= 0.0, "net usable");
  bool identical = a.chosen == b.chosen;
  const auto pa = std::as_const(a.net.params()).blocks();
  const auto pb = std::as_const(b.net.params()).blocks();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    identical = identical && std::equal(pa[i].begin(), pa[i].end(), pb[i].begin(), pb[i].end());
  }
  for (std::size_t i = 0; i < a.restarts.size(); ++i) {
    identical = identical && a.restarts[i].validation_accuracy == b.restarts[i].validation_accuracy &&
                a.restarts[i].epochs_run == b.restarts[i].epochs_run;
  }
  c.expect(identical, "reruns differ");
  return c.outcome("1 restart reached training accuracy 1.0 in " +
                   std::to_string(one.restarts[0].best_epoch) + " epochs; 10 restarts chose restart " +
                   std::to_string(a.chosen) + " (validation " + num(best) + "); rerun bit-identical");
}

Outcome voting_truth_table() {
  Check c;
  const std::vector<double> w = {2.6, 1.0, 1.0, 0.4, -0.3};
  for (unsigned p = 0; p < 32; ++p) {
    std::vector<Vote> votes;
    int yes = 0;
    double yw = 0, nw = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      const bool y = (p >> i) & 1u;
      votes.push_back({"u" + std::to_string(i), w[i], y ? Label::Yes : Label::No, y ? 0.9 : 0.1});
      yes += y;
      (y ? yw : nw) += std::max(w[i], 0.0);
    }
    const Label top = votes[0].label;
    const Label majority = yes >= 3 ? Label::Yes : Label::No;
    const Label ratio = yw > nw ? Label::Yes : nw > yw ? Label::No : top;
    c.expect(decide(votes, VotingScenario::Majority).label == majority, "MAJORITY pattern " + std::to_string(p));
    c.expect(decide(votes, VotingScenario::Ratio).label == ratio, "RATIO pattern " + std::to_string(p));
    c.expect(decide(votes, VotingScenario::NoVoting).label == top, "NO_VOTING pattern " + std::to_string(p));
    if (p == 0 || p == 31) {
      const Label all = p ? Label::Yes : Label::No;
      c.expect(majority == all && ratio == all, "unanimity");
    }
  }
  const std::vector<Vote> diverge = {{"a", 2.6, Label::Yes, 0.9}, {"b", 1.0, Label::No, 0.1},
                                     {"c", 1.0, Label::No, 0.1}};
  c.expect(decide(diverge, VotingScenario::Majority).label == Label::No, "Y(2.6)/N/N majority");
  c.expect(decide(diverge, VotingScenario::Ratio).label == Label::Yes, "Y(2.6)/N/N ratio");
  return c.outcome("32 patterns x 3 scenarios; Y(2.6)/N(1.0)/N(1.0) gives MAJORITY=N, RATIO=Y");
}

Outcome ablation_shape() {
  Check c;
  const auto cfg = NormalizerConfig::english();
  UnitIndex units(split_articles(testing::fixture_articles()));
  std::vector<TermSequence> terms;
  for (const auto& u : units.units()) terms.push_back(preprocess(u.text, cfg));
  IndexOptions io;
  io.lsi.k = 30;
  io.lda.k = 20;
  io.lda.iterations = 200;
  const Engine engine(std::move(units), build_index(terms, io), cfg);
  const std::vector<FeatureKind> all(kAllFeatureKinds.begin(), kAllFeatureKinds.end());
  const auto cases = testing::fixture_cases();
  IrProtocol protocol;
  protocol.train.epochs = 50;
  const IrExperiment exp(engine.candidates(cases, all), all, protocol);
  const SubsetEvaluator eval = [&](std::span<const FeatureKind> k, std::uint64_t s) { return exp.f1(k, s); };
  const std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};

  const auto loo = ablate_leave_one_out(eval, all, seeds);
  c.expect(loo.rows.size() == 7, "leave-one-out rows " + std::to_string(loo.rows.size()));
  const auto groups = reported_triples();
  const auto tri = ablate_triples(eval, groups, seeds);
  c.expect(tri.rows.size() == groups.size(), "triples rows");
  for (const auto& r : tri.rows) {
    const auto f = r.formatted();
    const bool shaped = f.size() == 14 && f[1] == '.' && f.substr(5, 4) == " \xc2\xb1 " && f[10] == '.';
    c.expect(shaped, "formatting '" + f + "'");
    c.expect(r.values.size() == seeds.size(), "per-seed values");
  }
  const std::vector<FeatureKind> lmj = {FeatureKind::LsiCosine, FeatureKind::ManhattanTf,
                                        FeatureKind::JaccardTfidf};
  const std::vector<std::uint64_t> one_seed = {42};
  const auto sweep = ablate_c_sweep(exp, lmj, c_grid(100, 2000, 100), one_seed);
  c.expect(sweep.rows.size() == 20, "c-sweep rows " + std::to_string(sweep.rows.size()));
  c.expect(!sweep.rows.empty() && sweep.rows.back().description == "C=2000", "last C");
  return c.outcome("LOO 7 rows (All " + loo.rows[0].formatted() + "), " + std::to_string(tri.rows.size()) +
                   " triples (LSI/MAN/JAC " + tri.rows.back().formatted() + "), c-sweep 20 rows");
}

Outcome real_data_check() {
  auto real = load_real_data();
  if (!real) return {Outcome::Skip, "LQA_COLIEE_DIR not set or holds no civil code and query files"};
  Check c;
  const auto cfg = NormalizerConfig::english();
  const std::vector<FeatureKind> kinds = {FeatureKind::LsiCosine, FeatureKind::ManhattanTf,
                                          FeatureKind::JaccardTfidf};
  auto f1_for = [&](SplitResult split) {
    UnitIndex units(std::move(split));
    std::vector<TermSequence> terms;
    for (const auto& u : units.units()) terms.push_back(preprocess(u.text, cfg));
    IndexOptions io;
    io.fit_lda = false;
    const Engine engine(std::move(units), build_index(terms, io), cfg);
    const IrExperiment exp(engine.candidates(real->cases, kinds), kinds, {});
    return exp.f1(kinds, 42);
  };
  const double split_f1 = f1_for(split_articles(real->articles));
  const double whole_f1 = f1_for(whole_articles(real->articles));
  c.expect(split_f1 >= 0.45, "split F1 " + num(split_f1));
  c.expect(split_f1 > whole_f1, "split F1 " + num(split_f1) + " not above whole-article F1 " + num(whole_f1));
  return c.outcome("held-out F1 " + num(split_f1) + " with splitting, " + num(whole_f1) + " without");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {1, "splitting fixture", splitting_fixture, 1.0},
      {2, "jaccard oracle", jaccard_oracle, 5.0},
      {3, "svd properties", svd_properties, 30.0},
      {4, "ranking oracle", ranking_oracle, 10.0},
      {5, "threshold semantics", threshold_semantics, 1.0},
      {6, "cnn shape chain", cnn_shape_chain, 1.0},
      {7, "gradient check", gradient_check, 10.0},
      {8, "qa trainability", qa_trainability, 60.0},
      {9, "voting truth table", voting_truth_table, 1.0},
      {10, "ablation harness shape", ablation_shape, 120.0},
      {11, "real-data check", real_data_check, 0.0},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Outcome::Pass && cr.budget_seconds > 0 && secs > cr.budget_seconds) {
      o = {Outcome::Fail, "took " + num(secs, 3) + " s, budget " + num(cr.budget_seconds, 3) + " s"};
    }
    const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", tag, cr.number, cr.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.status == Outcome::Fail;
  }
  std::printf("%d criterion failure(s)\n", failed);
  return failed == 0 ? 0 : 1;
}
