// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <latlapmed/dataset.hpp>
#include <latlapmed/gem.hpp>
#include <latlapmed/kernel_graph.hpp>
#include <latlapmed/med_solver.hpp>

namespace latlapmed {

enum class BetaRule {
  // beta = 10 C l / a^2, recomputed every iteration as the anomalous
  // count a changes.
  Scaled,
  Fixed,
};

struct FitConfig {
  double phi = 0.05;
  double rho = 1.0;
  int k_gem = 10;
  double C = 50.0;
  BetaRule beta_rule = BetaRule::Scaled;
  double beta_fixed = 0.0;
  KernelConfig kernel;  // rbf, sigma 1
  int k_lap = 50;       // clamped to a - 1 on small subsets
  double tau = 100.0;
  Metric metric = Metric::Euclidean;
  int max_em_iters = 30;
  double em_tol = 0.0;  // fraction of n; 0 requires an exact fixed point
  int candidate_width = 4;
  double solver_tol = 1e-8;
  long solver_max_iter = 2000000;
};

struct IterationRecord {
  int iter = 0;  // 1-based
  double objective = 0;
  Index anomaly_count = 0;
  Index changed = 0;  // mask Hamming distance to the previous iteration
  long fp = -1, fn = -1;  // against truth utility when present
  double beta = 0;
  int k_lap_used = 0;
  bool k_lap_clamped = false;
};

// Kernel expansion on the anomalous subset; enough to score new points
// without the training factorization.
struct DecisionModel {
  Matrix subset_features;
  Vector weights;  // (I + 2 beta L K)^{-1} Jt Y alpha
  double bias = 0;
  KernelConfig kernel;

  Vector evaluate(const Matrix& queries) const;
};

struct FitResult {
  std::vector<uint8_t> anomaly_mask;
  DualSolution dual;
  std::vector<IterationRecord> trace;  // one record per iteration
  int iterations = 0;
  bool converged = false;
  Vector decision_values;  // length n, zero outside the anomalous set
  DecisionModel model;
  std::vector<Index> subset;  // anomalous indices, ascending
};

using FitObserver =
    std::function<void(int iteration, const std::vector<uint8_t>& mask)>;

// EM loop: entropy-set estimate of the anomalous subset, then the
// Laplacian-regularized margin solve on that subset, feeding the decision
// values back as edge penalties.  Iteration 1 sees zero penalties, so a
// single iteration reproduces the two-stage pipeline.  Stops at a mask
// fixed point, after max_em_iters, or when a mask cycle is detected (then
// the best-objective iterate is returned).  Labeled points stay anomalous
// throughout.
FitResult fit_latlapmed(const Dataset& d, const FitConfig& cfg,
                        const GemState* shared_gem = nullptr,
                        const FitObserver& observer = {});

// GEM once, margin solve once.
FitResult fit_two_stage(const Dataset& d, const FitConfig& cfg,
                        const GemState* shared_gem = nullptr);

struct LapmedResult {
  DualSolution dual;
  DecisionModel model;
  std::vector<Index> subset;
  Vector subset_decision_values;
};

// Margin solve on a fixed subset (all points when absent).  Passing the
// ground-truth anomaly mask gives the oracle upper reference.
LapmedResult fit_lapmed(const Dataset& d,
                        const std::optional<std::vector<uint8_t>>& subset_mask,
                        const FitConfig& cfg);

// In-sample labels: estimated nominal points are always -1; anomalous
// points take the sign of their decision value, with sign(0) = -1.
Eigen::VectorXi predict(const FitResult& r);

// Out-of-sample labels for query rows by kernel expansion sign.
Eigen::VectorXi predict(const FitResult& r, const Matrix& queries);

Eigen::VectorXi predict_lapmed(const LapmedResult& r, Index n);

}  // namespace latlapmed
