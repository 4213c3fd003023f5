// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include <latlapmed/common.hpp>

namespace latlapmed {

enum class KernelKind { Rbf, Cosine };

std::string to_string(KernelKind k);
KernelKind kernel_from_string(const std::string& s);

struct KernelConfig {
  KernelKind kind = KernelKind::Rbf;
  double sigma = 1.0;  // rbf bandwidth, ignored for cosine
};

struct KernelMatrix {
  Matrix values;
  KernelConfig config;
};

struct LaplacianMatrix {
  Matrix values;
  int neighbors = 0;      // k actually used
  double heat_scale = 0;  // tau
};

// Dense symmetric distance matrix with an exactly zero diagonal.  Cosine
// distance is 1 - cosine similarity and rejects all-zero rows.
Matrix pairwise_distances(const Matrix& X, Metric metric, int workers = 0);

// Dense Gram matrix.  Rbf: exp(-||xi-xj||^2 / (2 sigma^2)), unit diagonal,
// entries in (0, 1].  Cosine: similarity, zero rows give zero entries.
KernelMatrix gram(const Matrix& X, const KernelConfig& cfg, int workers = 0);

// Kernel block between query rows A (m x p) and base rows B (a x p).
Matrix cross_gram(const Matrix& A, const Matrix& B, const KernelConfig& cfg);

// Symmetric normalized graph Laplacian on a k-nearest-neighbour graph with
// heat kernel weights exp(-d^2 / tau).  Neighbourhoods are symmetrized by
// union; a node whose incident weights all underflow keeps a unit diagonal.
LaplacianMatrix normalized_laplacian(const Matrix& X_subset, int k_lap,
                                     double tau, Metric metric);

// Rows and columns of M selected by idx (unique, in range), in idx order.
Matrix principal_submatrix(const Matrix& M, std::span<const Index> idx);

Matrix gather_rows(const Matrix& X, std::span<const Index> idx);

}  // namespace latlapmed
