#pragma once

#include "binhash/sdh.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

namespace binhash {

/// Linear classification head over codes: scores = b W + t^T.
struct ClassifierHead {
  Matrix w;  // l x c
  Vector t;  // c
};

struct SdhrModel {
  EmbeddingModel embedding;
  ClassifierHead head;
  CodeMatrix train_codes;
};

/// Feasibility slack for the unit-margin constraint.
inline constexpr double kMarginTol = 1e-9;

/// Euclidean projection of a score row onto the large-margin set
/// { r : r_j - max_{k != j} r_k >= 1 }.
///
/// Stationarity of the Lagrangian gives r_j = mu, r_k = mu - 1 with
/// multiplier lambda_k = 2(a_k - mu + 1) for the active wrong classes and
/// r_k = a_k for the rest, where
///   mu = (a_j + sum_{k active}(a_k + 1)) / (1 + |active|).
/// The active set is a prefix of the wrong-class values sorted descending, so
/// a linear scan over prefix sizes finds the multiplier-feasible solution.
inline RowVector r_step_project(const RowVector& a, Index true_class) {
  const Index c = a.size();
  if (c < 2) throw std::invalid_argument("r_step_project: need at least 2 classes");
  if (true_class < 0 || true_class >= c) throw std::invalid_argument("r_step_project: invalid class index");

  double top_wrong = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < c; ++k)
    if (k != true_class) top_wrong = std::max(top_wrong, a(k));
  if (a(true_class) - top_wrong >= 1.0 - kMarginTol) return a;

  std::vector<std::pair<double, Index>> wrong;
  wrong.reserve(static_cast<std::size_t>(c) - 1);
  for (Index k = 0; k < c; ++k)
    if (k != true_class) wrong.emplace_back(a(k), k);
  std::sort(wrong.begin(), wrong.end(),
            [](const auto& x, const auto& y) { return x.first > y.first; });

  const Index s_max = c - 1;
  double prefix_sum = 0.0;
  Index chosen = 0;
  double chosen_mu = 0.0;
  for (Index s = 1; s <= s_max; ++s) {
    prefix_sum += wrong[static_cast<std::size_t>(s - 1)].first;
    const double mu = (a(true_class) + prefix_sum + static_cast<double>(s)) / (1.0 + static_cast<double>(s));
    const bool multipliers_ok = wrong[static_cast<std::size_t>(s - 1)].first >= mu - 1.0;
    const bool excluded_ok = s == s_max || wrong[static_cast<std::size_t>(s)].first <= mu - 1.0;
    if (multipliers_ok) {  // remember the last prefix with nonnegative multipliers
      chosen = s;
      chosen_mu = mu;
      if (excluded_ok) break;
    }
  }
  // chosen >= 1 always: for s = 1, a_j - wrong[0] < 1 implies the multiplier
  // condition holds.

  RowVector r = a;
  r(true_class) = chosen_mu;
  for (Index s = 0; s < chosen; ++s) r(wrong[static_cast<std::size_t>(s)].second) = chosen_mu - 1.0;
  return r;
}

/// Row-wise projection of score targets onto the margin set.
inline Matrix r_step(const Matrix& scores, const LabelVector& lv) {
  validate_labels(lv, scores.rows());
  Matrix r(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i)
    r.row(i) = r_step_project(scores.row(i), lv.labels[static_cast<std::size_t>(i)]);
  return r;
}

/// Closed-form offset: t = (R - B W)^T e / n, the column means of the
/// regression residual.
inline Vector t_step(const Matrix& r, const Matrix& b, const Matrix& w) {
  if (b.rows() != r.rows() || b.cols() != w.rows() || w.cols() != r.cols())
    throw std::invalid_argument("t_step: inconsistent dimensions");
  if (r.rows() < 1) throw std::invalid_argument("t_step: empty input");
  return (r - b * w).colwise().mean().transpose();
}

/// argmax_k of (code . W + t)_k; ties resolve to the lowest class index.
inline std::int32_t classify(const RowVector& code_signs, const Matrix& w, const Vector& t) {
  if (code_signs.size() != w.rows() || w.cols() != t.size())
    throw std::invalid_argument("classify: inconsistent dimensions");
  const RowVector scores = code_signs * w + t.transpose();
  Index best = 0;
  for (Index k = 1; k < scores.size(); ++k)
    if (scores(k) > scores(best)) best = k;
  return static_cast<std::int32_t>(best);
}

inline std::int32_t classify(const RowVector& code_signs, const ClassifierHead& head) {
  return classify(code_signs, head.w, head.t);
}

/// Batch prediction over packed codes.
inline LabelVector predict(const CodeMatrix& codes, const Matrix& w, const Vector& t) {
  LabelVector out;
  out.num_classes = static_cast<std::int32_t>(w.cols());
  out.labels.reserve(static_cast<std::size_t>(codes.rows()));
  for (Index i = 0; i < codes.rows(); ++i)
    out.labels.push_back(classify(unpack_code_row(codes.row(i), codes.bits()), w, t));
  return out;
}

/// Train an SDHR model. Initialization and the per-iteration step order
/// (B, R, G, t, F) follow the alternating scheme with learned large-margin
/// regression targets; every step is an exact block minimizer, so the full
/// objective is non-increasing across iterations.
inline SdhrModel train_sdhr(const Dataset& train, const TrainConfig& cfg, TrainLog* log = nullptr) {
  validate_config(cfg);
  const Index n = train.rows();
  if (n < 1) throw std::invalid_argument("train_sdhr: empty training set");
  validate_labels(train.labels, n);
  if (train.labels.num_classes < 2) throw std::invalid_argument("train_sdhr: need at least 2 classes");
  validate_finite(train.features, "training features");

  const auto t_start = std::chrono::steady_clock::now();

  SdhrModel model;
  AnchorFit fit = fit_anchors(train.features, cfg.anchors, cfg.seed, cfg.sigma_override);
  model.embedding.anchors = std::move(fit.anchors);
  model.embedding.sigma = fit.sigma;

  const Matrix phi = rbf_map_batch(train.features, model.embedding);
  const FStepSolver f_solver(phi);

  Rng b_rng = make_rng(cfg.seed, 1);
  Matrix b = detail::random_sign_matrix(n, cfg.bits, b_rng);
  Matrix r = one_hot(train.labels);
  model.head.w = centered_ridge_solve(b, r, cfg.lambda);
  model.head.t = t_step(r, b, model.head.w);
  model.embedding.projection = f_solver.solve(phi, b);
  Matrix fx = phi * model.embedding.projection;

  double prev_objective = 0.0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Matrix shifted = r.rowwise() - model.head.t.transpose();  // R - e t^T
    const Matrix q = (shifted * model.head.w.transpose() + cfg.v * fx).transpose();
    b = b_step(model.head.w, q, std::move(b), cfg.max_sweeps);

    const Matrix scores = (b * model.head.w).rowwise() + model.head.t.transpose();
    r = r_step(scores, train.labels);

    model.head.w = centered_ridge_solve(b, r, cfg.lambda);
    model.head.t = t_step(r, b, model.head.w);

    model.embedding.projection = f_solver.solve(phi, b);
    fx = phi * model.embedding.projection;

    const double objective =
        ((r - b * model.head.w).rowwise() - model.head.t.transpose()).squaredNorm() +
        cfg.lambda * model.head.w.squaredNorm() + cfg.v * (b - fx).squaredNorm();
    if (log) {
      log->objectives.push_back(objective);
      log->iterations = iter + 1;
    }
    if (cfg.verbose)
      std::fprintf(stderr, "[sdhr] iter %d/%d objective %.6f\n", iter + 1, cfg.max_iters, objective);

    if (iter > 0 && std::abs(prev_objective - objective) < cfg.tol * std::abs(prev_objective)) break;
    prev_objective = objective;
  }

  model.train_codes = CodeMatrix::from_signs(b);
  if (log)
    log->train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return model;
}

}  // namespace binhash
