#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace binhash {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Class labels aligned with the rows of a feature matrix. Labels are
/// 0-based; num_classes is the total class count c (labels lie in [0, c)).
struct LabelVector {
  std::vector<std::int32_t> labels;
  std::int32_t num_classes = 0;

  Index size() const { return static_cast<Index>(labels.size()); }
};

/// A labeled dataset: one example per row of features.
struct Dataset {
  Matrix features;  // n x d
  LabelVector labels;

  Index rows() const { return features.rows(); }
  Index dim() const { return features.cols(); }
};

struct SplitSpec {
  Index test_count = 0;
  std::uint64_t seed = 0;
};

inline void validate_labels(const LabelVector& lv, Index n) {
  if (lv.size() != n)
    throw std::invalid_argument("label count " + std::to_string(lv.labels.size()) +
                                " does not match example count " + std::to_string(n));
  if (lv.num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  for (std::int32_t y : lv.labels)
    if (y < 0 || y >= lv.num_classes)
      throw std::invalid_argument("label " + std::to_string(y) + " out of range [0, " +
                                  std::to_string(lv.num_classes) + ")");
}

inline void validate_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite entries");
}

/// Zero-one label matrix Y: Y(i, k) = 1 iff labels[i] == k.
inline Matrix one_hot(const LabelVector& lv) {
  Matrix y = Matrix::Zero(lv.size(), lv.num_classes);
  for (Index i = 0; i < lv.size(); ++i) y(i, lv.labels[static_cast<std::size_t>(i)]) = 1.0;
  return y;
}

/// Shared sign convention: sign(0) = +1.
inline double sign_pm1(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace binhash
