#pragma once

#include "binhash/code_matrix.hpp"
#include "binhash/discrete_opt.hpp"
#include "binhash/embedding.hpp"
#include "binhash/rng.hpp"
#include "binhash/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

namespace binhash {

struct TrainConfig {
  int bits = 64;
  double lambda = 1.0;        // ridge weight on W
  double v = 1e-5;            // embedding-fit weight
  int max_iters = 5;
  Index anchors = 1000;
  std::uint64_t seed = 0;
  double tol = 1e-5;          // relative objective-change stopping tolerance
  double sigma_override = 0.0;  // <= 0: use the bandwidth heuristic
  int max_sweeps = 10;        // coordinate-descent sweeps per B-step
  bool verbose = false;
};

inline void validate_config(const TrainConfig& cfg) {
  if (cfg.bits < 1) throw std::invalid_argument("config: bits must be >= 1");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("config: lambda must be positive");
  if (!(cfg.v > 0.0)) throw std::invalid_argument("config: v must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("config: max_iters must be >= 1");
  if (cfg.anchors < 1) throw std::invalid_argument("config: anchors must be >= 1");
  if (cfg.tol < 0.0) throw std::invalid_argument("config: tol must be non-negative");
  if (cfg.max_sweeps < 1) throw std::invalid_argument("config: max_sweeps must be >= 1");
}

struct TrainLog {
  std::vector<double> objectives;  // full objective, one value per outer iteration
  double train_seconds = 0.0;
  int iterations = 0;
};

struct SdhModel {
  EmbeddingModel embedding;
  Matrix w;  // l x c code-to-label projection
  CodeMatrix train_codes;
};

namespace detail {

inline Matrix random_sign_matrix(Index rows, Index cols, Rng& rng) {
  Matrix b(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) b(i, k) = rand_sign(rng);
  return b;
}

inline void warn_single_class(const LabelVector& lv) {
  if (lv.num_classes < 2)
    std::fprintf(stderr, "[binhash] warning: training with a single class; codes carry no label signal\n");
}

}  // namespace detail

/// Train an SDH model: alternate the closed-form W solve, the embedding
/// projection solve, and discrete cyclic coordinate descent on B, against the
/// fixed zero-one label matrix. Stops after max_iters or when the relative
/// objective change drops below tol.
inline SdhModel train_sdh(const Dataset& train, const TrainConfig& cfg, TrainLog* log = nullptr) {
  validate_config(cfg);
  const Index n = train.rows();
  if (n < 1) throw std::invalid_argument("train_sdh: empty training set");
  validate_labels(train.labels, n);
  if (n < train.labels.num_classes) throw std::invalid_argument("train_sdh: fewer examples than classes");
  validate_finite(train.features, "training features");
  detail::warn_single_class(train.labels);

  const auto t_start = std::chrono::steady_clock::now();

  SdhModel model;
  AnchorFit fit = fit_anchors(train.features, cfg.anchors, cfg.seed, cfg.sigma_override);
  model.embedding.anchors = std::move(fit.anchors);
  model.embedding.sigma = fit.sigma;

  const Matrix phi = rbf_map_batch(train.features, model.embedding);
  const FStepSolver f_solver(phi);
  const Matrix y = one_hot(train.labels);

  Rng b_rng = make_rng(cfg.seed, 1);
  Matrix b = detail::random_sign_matrix(n, cfg.bits, b_rng);

  double prev_objective = 0.0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    model.w = ridge_solve(b, y, cfg.lambda);
    model.embedding.projection = f_solver.solve(phi, b);
    const Matrix fx = phi * model.embedding.projection;

    const Matrix q = (y * model.w.transpose() + cfg.v * fx).transpose();
    b = b_step(model.w, q, std::move(b), cfg.max_sweeps);

    const double objective = (y - b * model.w).squaredNorm() + cfg.lambda * model.w.squaredNorm() +
                             cfg.v * (b - fx).squaredNorm();
    if (log) {
      log->objectives.push_back(objective);
      log->iterations = iter + 1;
    }
    if (cfg.verbose)
      std::fprintf(stderr, "[sdh] iter %d/%d objective %.6f\n", iter + 1, cfg.max_iters, objective);

    if (iter > 0 && std::abs(prev_objective - objective) < cfg.tol * std::abs(prev_objective)) break;
    prev_objective = objective;
  }

  model.train_codes = CodeMatrix::from_signs(b);
  if (log)
    log->train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return model;
}

}  // namespace binhash
