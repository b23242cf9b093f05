#include <algorithm>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCore>
#include <spdlog/spdlog.h>

#include "lqa/error.hpp"
#include "lqa/random.hpp"
#include "lqa/vectorspace.hpp"

namespace lqa {

namespace {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseRows to_matrix(std::span<const SparseVector> docs, std::size_t dim) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    for (const auto& e : docs[r].entries()) {
      if (e.index >= dim) throw DataError("document vector index exceeds matrix width");
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(e.index), e.weight);
    }
  }
  SparseRows m(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

LsiModel fit_lsi(std::span<const SparseVector> docs, std::size_t dim, const LsiOptions& options) {
  if (options.k < 1) throw DataError("LSI dimension k must be at least 1");
  const std::size_t rank_bound = std::min(dim, docs.size());
  if (rank_bound == 0) throw DataError("LSI needs a non-empty document-term matrix");

  std::size_t k = options.k;
  if (k > rank_bound) {
    spdlog::warn("LSI dimension {} exceeds min(terms={}, documents={}); clamped to {}", k, dim,
                 docs.size(), rank_bound);
    k = rank_bound;
  }
  const auto width = static_cast<Eigen::Index>(std::min(k + options.oversampling, rank_bound));

  const SparseRows a = to_matrix(docs, dim);
  const Eigen::SparseMatrix<double> at = a.transpose();

  Rng rng(options.seed);
  Eigen::MatrixXd omega(static_cast<Eigen::Index>(dim), width);
  for (Eigen::Index c = 0; c < omega.cols(); ++c) {
    for (Eigen::Index r = 0; r < omega.rows(); ++r) omega(r, c) = rng.normal();
  }

  Eigen::MatrixXd q = orthonormal_basis(a * omega);
  for (std::size_t i = 0; i < options.power_iterations; ++i) {
    const Eigen::MatrixXd z = orthonormal_basis(at * q);
    q = orthonormal_basis(a * z);
  }

  // B = Q^T A is small (width x dim); its right singular vectors are A's.
  const Eigen::MatrixXd b = (at * q).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);

  LsiModel model;
  model.options = options;
  model.weighting = options.weighting;
  const auto kk = static_cast<Eigen::Index>(k);
  model.projection = svd.matrixV().leftCols(kk);
  model.singular_values = svd.singularValues().head(kk);

  // Fix the sign of each direction so the largest component is positive.
  for (Eigen::Index c = 0; c < kk; ++c) {
    Eigen::Index arg = 0;
    model.projection.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.projection(arg, c) < 0) model.projection.col(c) *= -1.0;
  }
  return model;
}

std::vector<double> project_lsi(const SparseVector& vec, const LsiModel& model) {
  std::vector<double> out(model.k(), 0.0);
  for (const auto& e : vec.entries()) {
    if (e.index >= model.dim()) continue;
    const auto row = model.projection.row(static_cast<Eigen::Index>(e.index));
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += e.weight * row(static_cast<Eigen::Index>(c));
  }
  return out;
}

}  // namespace lqa
