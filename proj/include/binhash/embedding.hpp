#pragma once

#include "binhash/code_matrix.hpp"
#include "binhash/rng.hpp"
#include "binhash/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace binhash {

/// Anchor-based RBF embedding. phi(x)_j = exp(-||x - a_j||^2 / (2 sigma^2));
/// the code-space embedding is F(x) = phi(x) P once `projection` is fitted.
struct EmbeddingModel {
  Matrix anchors;     // m x d
  double sigma = 0.0;
  Matrix projection;  // m x l; empty until trained

  Index anchor_count() const { return anchors.rows(); }
  Index dim() const { return anchors.cols(); }
  int bits() const { return static_cast<int>(projection.cols()); }
  bool trained() const { return projection.size() > 0; }
};

struct AnchorFit {
  Matrix anchors;
  double sigma = 0.0;
  std::vector<std::uint64_t> anchor_indices;
};

/// Number of examples used by the bandwidth heuristic.
inline constexpr Index kBandwidthSample = 2000;

/// Sample m distinct training rows as anchors and set sigma to the mean
/// example-to-anchor Euclidean distance over a fixed-size subsample.
inline AnchorFit fit_anchors(const Matrix& train, Index m, std::uint64_t seed,
                             double sigma_override = 0.0) {
  const Index n = train.rows();
  if (m < 1 || m > n) throw std::invalid_argument("fit_anchors: need 1 <= m <= n");
  validate_finite(train, "training features");

  Rng rng = make_rng(seed);
  AnchorFit fit;
  fit.anchor_indices = sample_without_replacement(rng, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m));
  fit.anchors.resize(m, train.cols());
  for (Index j = 0; j < m; ++j) fit.anchors.row(j) = train.row(static_cast<Index>(fit.anchor_indices[static_cast<std::size_t>(j)]));

  if (sigma_override > 0.0) {
    fit.sigma = sigma_override;
    return fit;
  }

  const Index s = std::min(kBandwidthSample, n);
  std::vector<std::uint64_t> sample_idx =
      sample_without_replacement(rng, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
  double total = 0.0;
  for (std::uint64_t i : sample_idx)
    for (Index j = 0; j < m; ++j)
      total += (train.row(static_cast<Index>(i)) - fit.anchors.row(j)).norm();
  fit.sigma = total / (static_cast<double>(s) * static_cast<double>(m));
  if (!(fit.sigma > 0.0))
    throw std::runtime_error("fit_anchors: zero bandwidth (all sampled examples coincide with anchors)");
  return fit;
}

/// RBF feature map of a single example; outputs lie in (0, 1].
inline RowVector rbf_map(const RowVector& x, const EmbeddingModel& model) {
  if (x.size() != model.dim())
    throw std::invalid_argument("rbf_map: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                                std::to_string(model.dim()) + ")");
  const double inv = 1.0 / (2.0 * model.sigma * model.sigma);
  RowVector phi(model.anchor_count());
  for (Index j = 0; j < model.anchor_count(); ++j)
    phi(j) = std::exp(-(x - model.anchors.row(j)).squaredNorm() * inv);
  return phi;
}

/// Batch RBF map, one row per example. Squared distances go through the
/// expansion ||x||^2 + ||a||^2 - 2 x.a in row blocks; tiny negative values
/// from cancellation are clamped to zero so outputs stay in (0, 1].
inline Matrix rbf_map_batch(const Matrix& x, const EmbeddingModel& model) {
  if (x.cols() != model.dim()) throw std::invalid_argument("rbf_map_batch: dimension mismatch");
  const Index n = x.rows(), m = model.anchor_count();
  const double inv = 1.0 / (2.0 * model.sigma * model.sigma);
  const Vector anchor_sq = model.anchors.rowwise().squaredNorm();
  Matrix phi(n, m);
  constexpr Index block = 4096;
  for (Index r0 = 0; r0 < n; r0 += block) {
    const Index rows = std::min(block, n - r0);
    auto xb = x.middleRows(r0, rows);
    Matrix sq = (-2.0 * xb * model.anchors.transpose()).rowwise() + anchor_sq.transpose();
    sq.colwise() += xb.rowwise().squaredNorm();
    phi.middleRows(r0, rows) = (-(sq.cwiseMax(0.0)) * inv).array().exp();
  }
  return phi;
}

/// F(x) = phi(x) P.
inline RowVector embed(const RowVector& x, const EmbeddingModel& model) {
  if (!model.trained()) throw std::logic_error("embed: model has no projection (untrained)");
  return rbf_map(x, model) * model.projection;
}

/// Quantize F(x) to a packed +-1 code; sign(0) = +1.
inline std::vector<std::uint8_t> encode(const RowVector& x, const EmbeddingModel& model) {
  return pack_code_row(embed(x, model));
}

/// Encode a batch of examples into a CodeMatrix.
inline CodeMatrix encode_batch(const Matrix& x, const EmbeddingModel& model) {
  if (!model.trained()) throw std::logic_error("encode_batch: model has no projection (untrained)");
  return CodeMatrix::from_signs(rbf_map_batch(x, model) * model.projection);
}

/// Random hyperplanes for the LSH baseline, one hyperplane per bit.
inline Matrix make_lsh_hyperplanes(int bits, Index dim, std::uint64_t seed) {
  if (bits < 1 || dim < 1) throw std::invalid_argument("make_lsh_hyperplanes: bits and dim must be >= 1");
  Rng rng = make_rng(seed);
  Matrix h(bits, dim);
  for (int k = 0; k < bits; ++k)
    for (Index j = 0; j < dim; ++j) h(k, j) = rand_gaussian(rng);
  return h;
}

/// Sign-of-projection code: bit k = sign(hyperplanes.row(k) . x), sign(0) = +1.
inline std::vector<std::uint8_t> lsh_encode(const RowVector& x, const Matrix& hyperplanes) {
  if (x.size() != hyperplanes.cols()) throw std::invalid_argument("lsh_encode: dimension mismatch");
  return pack_code_row((hyperplanes * x.transpose()).transpose());
}

inline CodeMatrix lsh_encode_batch(const Matrix& x, const Matrix& hyperplanes) {
  if (x.cols() != hyperplanes.cols()) throw std::invalid_argument("lsh_encode_batch: dimension mismatch");
  return CodeMatrix::from_signs(x * hyperplanes.transpose());
}

}  // namespace binhash
