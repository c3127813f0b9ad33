#pragma once

#include "binhash/types.hpp"

#include <Eigen/Cholesky>

#include <stdexcept>
#include <string>

namespace binhash {

/// Objective of the binary code subproblem: ||B W||_F^2 - 2 tr(B Q),
/// minimized over B in {-1,+1}^(n x l). W is l x c, Q is l x n.
/// tr(B Q) is accumulated entrywise as sum_ik B(i,k) Q(k,i), never as the
/// n x n product.
inline double b_step_objective(const Matrix& b, const Matrix& w, const Matrix& q) {
  return (b * w).squaredNorm() - 2.0 * b.cwiseProduct(q.transpose()).sum();
}

namespace detail {

inline void check_b_step_dims(const Matrix& b, const Matrix& w, const Matrix& q) {
  if (w.rows() != b.cols() || q.rows() != b.cols() || q.cols() != b.rows())
    throw std::invalid_argument("b_step: inconsistent dimensions (B " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ", W " + std::to_string(w.rows()) + "x" +
                                std::to_string(w.cols()) + ", Q " + std::to_string(q.rows()) + "x" +
                                std::to_string(q.cols()) + ")");
}

}  // namespace detail

/// One cyclic-coordinate update of bit column k, in place. Returns true if
/// any bit changed.
///
/// Writing B = [B' z] (z = column k) and W = [W'; v] (v = row k), the
/// objective as a function of z alone is
///   ||B'W' + z v||^2 - 2 tr(B Q)
///   = 2 z^T (B'W' v^T) - 2 z^T q_hat + const        (||z v||^2 = n ||v||^2)
/// where q_hat is column k of Q^T. It is separable per bit, so the exact
/// column minimizer is z = sign(q_hat - B'W' v^T), with sign(0) = +1.
/// B'W' v^T is evaluated as (B W) v^T - ||v||^2 z.
inline bool b_step_update_column(Matrix& b, const Matrix& w, const Matrix& q, Index k) {
  detail::check_b_step_dims(b, w, q);
  const Vector wv = w * w.row(k).transpose();            // l-vector: W v^T
  const double v_sq = wv(k);                             // ||v||^2
  const Vector excl = b * wv - v_sq * b.col(k);          // B'W' v^T
  bool changed = false;
  for (Index i = 0; i < b.rows(); ++i) {
    const double z = sign_pm1(q(k, i) - excl(i));
    if (z != b(i, k)) {
      b(i, k) = z;
      changed = true;
    }
  }
  return changed;
}

/// Inputs of the binary code subproblem: minimize ||B W||^2 - 2 tr(B Q)
/// starting from b_init (entries +-1).
struct BStepProblem {
  Matrix w;       // l x c
  Matrix q;       // l x n
  Matrix b_init;  // n x l
};

/// Discrete cyclic coordinate descent for min ||B W||^2 - 2 tr(B Q) over
/// B in {-1,+1}^(n x l). Sweeps all columns until a full sweep changes
/// nothing or max_sweeps is reached; the objective never increases.
inline Matrix b_step(const Matrix& w, const Matrix& q, Matrix b, int max_sweeps = 10) {
  detail::check_b_step_dims(b, w, q);
  if (max_sweeps < 1) throw std::invalid_argument("b_step: max_sweeps must be >= 1");
  for (Index i = 0; i < b.rows(); ++i)
    for (Index k = 0; k < b.cols(); ++k)
      if (b(i, k) != 1.0 && b(i, k) != -1.0)
        throw std::invalid_argument("b_step: initial B entries must be +-1");

  const Index n = b.rows(), l = b.cols();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Matrix bw = b * w;  // refreshed per sweep; updated incrementally per column
    bool changed = false;
    for (Index k = 0; k < l; ++k) {
      const RowVector v = w.row(k);
      const double v_sq = v.squaredNorm();
      const Vector excl = bw * v.transpose() - v_sq * b.col(k);
      bool column_changed = false;
      for (Index i = 0; i < n; ++i) {
        const double z = sign_pm1(q(k, i) - excl(i));
        if (z != b(i, k)) {
          bw.row(i) += (z - b(i, k)) * v;
          b(i, k) = z;
          column_changed = true;
        }
      }
      changed = changed || column_changed;
    }
    if (!changed) break;
  }
  return b;
}

inline Matrix b_step(const BStepProblem& problem, int max_sweeps = 10) {
  return b_step(problem.w, problem.q, problem.b_init, max_sweeps);
}

/// Closed-form ridge regression W = (B^T B + lambda I)^(-1) B^T Y.
inline Matrix ridge_solve(const Matrix& b, const Matrix& y, double lambda) {
  if (b.rows() != y.rows()) throw std::invalid_argument("ridge_solve: row count mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge_solve: lambda must be positive");
  Matrix gram = b.transpose() * b;
  gram.diagonal().array() += lambda;
  return Eigen::LLT<Matrix>(gram).solve(b.transpose() * y);
}

/// Row-centering transform H X with H = I - e e^T / n (column means removed).
inline Matrix center_rows(const Matrix& x) {
  return x.rowwise() - x.colwise().mean();
}

/// Centered ridge W = (B^T H B + lambda I)^(-1) B^T H R with H = I - e e^T/n.
/// Equivalent to plain ridge on the column-centered B and R, since H is
/// symmetric idempotent.
inline Matrix centered_ridge_solve(const Matrix& b, const Matrix& r, double lambda) {
  if (b.rows() != r.rows()) throw std::invalid_argument("centered_ridge_solve: row count mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("centered_ridge_solve: lambda must be positive");
  const Matrix bc = center_rows(b);
  Matrix gram = bc.transpose() * bc;
  gram.diagonal().array() += lambda;
  return Eigen::LLT<Matrix>(gram).solve(bc.transpose() * center_rows(r));
}

/// Scale-invariant stabilizer for the embedding normal equations.
inline double f_step_epsilon(const Matrix& phi) {
  return 1e-6 * phi.squaredNorm() / static_cast<double>(phi.cols());
}

/// Least-squares fit of the embedding projection:
/// P = (phi^T phi + eps I)^(-1) phi^T B. eps >= 0; the default stabilizer
/// keeps a rank-deficient Gram matrix invertible.
inline Matrix f_step_solve(const Matrix& phi, const Matrix& b, double eps) {
  if (phi.rows() != b.rows()) throw std::invalid_argument("f_step_solve: row count mismatch");
  if (eps < 0.0) throw std::invalid_argument("f_step_solve: eps must be non-negative");
  Matrix gram = phi.transpose() * phi;
  gram.diagonal().array() += eps;
  return Eigen::LLT<Matrix>(gram).solve(phi.transpose() * b);
}

inline Matrix f_step_solve(const Matrix& phi, const Matrix& b) {
  return f_step_solve(phi, b, f_step_epsilon(phi));
}

/// Reusable factorization of (phi^T phi + eps I) for trainers that run the
/// projection solve once per iteration against a fixed phi.
class FStepSolver {
 public:
  explicit FStepSolver(const Matrix& phi) : eps_(f_step_epsilon(phi)) {
    Matrix gram = phi.transpose() * phi;
    gram.diagonal().array() += eps_;
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("FStepSolver: factorization failed (non-finite phi?)");
  }

  Matrix solve(const Matrix& phi, const Matrix& b) const { return llt_.solve(phi.transpose() * b); }
  double eps() const { return eps_; }

 private:
  double eps_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace binhash
