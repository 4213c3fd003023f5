// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <latlapmed/dataset.hpp>
#include <latlapmed/rng.hpp>

namespace latlapmed {

struct SimConfig {
  Index n = 7000;
  Index p = 3;
  double df = 30.0;               // t degrees of freedom, > 2
  double phi_true = 0.05;         // anomaly fraction
  double top_utility_frac = 0.25; // share of anomalies that are high utility
  double label_frac = 0.30;       // share of high-utility labels revealed
  int n_components = 3;           // feature subsets scored against the rest
  Index comp_size_min = 1;
  Index comp_size_max = 0;        // 0 means ceil(p / 2)
  uint64_t seed = 0;
};

// Sigma = A A' / p + 0.1 I with standard normal A; always SPD.
Matrix random_scale_matrix(Index p, Rng& rng);

// n draws of the unfolded latent multivariate t: z sqrt(df / u) with
// z ~ N(0, Sigma), u ~ chi-square(df).  Covariance is Sigma df / (df - 2).
Matrix sample_latent_t(Index n, const Matrix& sigma, double df, Rng& rng);

// Utility score of each point: the best component-wise mean contrast,
// max_h ( mean over columns in comps[h] - mean over the other columns ).
Vector score_points(const Matrix& X, const std::vector<std::vector<Index>>& comps);

// Folded multivariate t sample with planted anomalies and partially revealed
// utility labels.  Anomalies are the ceil(phi n) highest-scoring points, the
// top quarter of them are high utility, and label_frac of the high-utility
// points plus an equal count of low-utility anomalies get observed labels.
// Same seed, same Dataset, bit for bit.
Dataset generate(const SimConfig& cfg);

}  // namespace latlapmed
