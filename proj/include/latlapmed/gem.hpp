// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <latlapmed/dataset.hpp>
#include <latlapmed/kernel_graph.hpp>

namespace latlapmed {

struct GemConfig {
  double phi = 0.05;  // anomaly fraction, in (0, 1)
  int k_gem = 10;     // edges per point, in [1, n-1]
  double rho = 1.0;   // penalty activation threshold, >= 0
  Metric metric = Metric::Euclidean;
  // Candidate lists hold candidate_width * k_gem nearest base neighbours;
  // penalties can only reorder edges inside this window.
  int candidate_width = 4;
};

struct GemEdge {
  Index neighbor;
  double base;  // unpenalized distance
};

// Candidate edges are computed once at initialization and shared between
// fits on the same data; penalties, scores and the anomaly mask are
// refreshed every iteration.
struct GemState {
  std::shared_ptr<const std::vector<std::vector<GemEdge>>> base_edges;
  GemConfig config;
  Index n = 0;
  Vector penalties;  // last applied per-point penalty source
  std::vector<uint8_t> anomaly_mask;
  Vector scores;
};

GemState init_gem(const Matrix& X, const GemConfig& cfg, int workers = 0);

// k_gem smallest penalized edge lengths per point, ascending.  An edge to
// neighbour j is stretched by d_hat[j] when d_hat[j] > rho or j carries an
// observed +1 label; otherwise the base length is kept.
std::vector<std::vector<double>> penalized_edges(const GemState& s,
                                                 const Vector& d_hat,
                                                 const LabelView& labels,
                                                 double rho);

// Per-point score: sum of its k_gem smallest penalized edges.
Vector gem_scores(const std::vector<std::vector<double>>& edges);

// Minimum-entropy acceptance: keeps the K = n - ceil(phi n) lowest-scoring
// points, flags the rest anomalous, then forces every index in `forced`
// anomalous.  Ties break toward the lower index.
std::vector<uint8_t> entropy_set(const GemState& s,
                                 const std::vector<std::vector<double>>& penalized,
                                 double phi, std::span<const Index> forced);

}  // namespace latlapmed
