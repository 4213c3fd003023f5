// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/kernel_graph.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace latlapmed {

std::string to_string(KernelKind k) {
  return k == KernelKind::Rbf ? "rbf" : "cosine";
}

KernelKind kernel_from_string(const std::string& s) {
  if (s == "rbf") return KernelKind::Rbf;
  if (s == "cosine") return KernelKind::Cosine;
  throw ValidationError("unknown kernel: " + s);
}

namespace {

Vector row_norms_checked(const Matrix& X, const char* who) {
  Vector norms = X.rowwise().norm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (norms[i] == 0.0) {
      throw ValidationError(std::string(who) +
                            ": cosine metric undefined for all-zero row " +
                            std::to_string(i));
    }
  }
  return norms;
}

}  // namespace

Matrix pairwise_distances(const Matrix& X, Metric metric, int workers) {
  Index n = X.rows();
  if (n < 1) throw ValidationError("pairwise_distances: empty matrix");
  Matrix D(n, n);
  if (metric == Metric::Euclidean) {
    parallel_for_blocks(n, workers, [&](Index lo, Index hi) {
      for (Index i = lo; i < hi; ++i) {
        for (Index j = 0; j < n; ++j) {
          D(i, j) = (X.row(i) - X.row(j)).norm();
        }
        D(i, i) = 0.0;
      }
    });
  } else {
    Vector norms = row_norms_checked(X, "pairwise_distances");
    parallel_for_blocks(n, workers, [&](Index lo, Index hi) {
      for (Index i = lo; i < hi; ++i) {
        for (Index j = 0; j < n; ++j) {
          double sim = X.row(i).dot(X.row(j)) / (norms[i] * norms[j]);
          D(i, j) = std::clamp(1.0 - sim, 0.0, 2.0);
        }
        D(i, i) = 0.0;
      }
    });
  }
  return D;
}

KernelMatrix gram(const Matrix& X, const KernelConfig& cfg, int workers) {
  Index n = X.rows();
  if (n < 1) throw ValidationError("gram: empty matrix");
  Matrix K(n, n);
  if (cfg.kind == KernelKind::Rbf) {
    if (!(cfg.sigma > 0)) {
      throw ValidationError("gram: rbf bandwidth must be positive");
    }
    double inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    parallel_for_blocks(n, workers, [&](Index lo, Index hi) {
      for (Index i = lo; i < hi; ++i) {
        for (Index j = 0; j < n; ++j) {
          K(i, j) = std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv);
        }
        K(i, i) = 1.0;
      }
    });
  } else {
    Vector norms = X.rowwise().norm();
    parallel_for_blocks(n, workers, [&](Index lo, Index hi) {
      for (Index i = lo; i < hi; ++i) {
        for (Index j = 0; j < n; ++j) {
          double d = norms[i] * norms[j];
          K(i, j) = d == 0.0 ? 0.0
                             : std::clamp(X.row(i).dot(X.row(j)) / d, -1.0, 1.0);
        }
        if (norms[i] != 0.0) K(i, i) = 1.0;
      }
    });
  }
  return {std::move(K), cfg};
}

Matrix cross_gram(const Matrix& A, const Matrix& B, const KernelConfig& cfg) {
  if (A.cols() != B.cols()) {
    throw ValidationError("cross_gram: dimension mismatch");
  }
  Matrix K(A.rows(), B.rows());
  if (cfg.kind == KernelKind::Rbf) {
    if (!(cfg.sigma > 0)) {
      throw ValidationError("cross_gram: rbf bandwidth must be positive");
    }
    double inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    for (Index i = 0; i < A.rows(); ++i) {
      for (Index j = 0; j < B.rows(); ++j) {
        K(i, j) = std::exp(-(A.row(i) - B.row(j)).squaredNorm() * inv);
      }
    }
  } else {
    Vector na = A.rowwise().norm();
    Vector nb = B.rowwise().norm();
    for (Index i = 0; i < A.rows(); ++i) {
      for (Index j = 0; j < B.rows(); ++j) {
        double d = na[i] * nb[j];
        K(i, j) = d == 0.0 ? 0.0
                           : std::clamp(A.row(i).dot(B.row(j)) / d, -1.0, 1.0);
      }
    }
  }
  return K;
}

LaplacianMatrix normalized_laplacian(const Matrix& X_subset, int k_lap,
                                     double tau, Metric metric) {
  Index m = X_subset.rows();
  if (m < 2) {
    throw ValidationError("normalized_laplacian: need at least 2 points");
  }
  if (k_lap < 1 || k_lap > m - 1) {
    throw ValidationError("normalized_laplacian: k_lap " +
                          std::to_string(k_lap) + " out of range [1, " +
                          std::to_string(m - 1) + "]");
  }
  if (!(tau > 0)) {
    throw ValidationError("normalized_laplacian: tau must be positive");
  }

  Matrix D = pairwise_distances(X_subset, metric);

  // union-symmetrized kNN adjacency, ties toward the lower index
  Matrix W = Matrix::Zero(m, m);
  std::vector<Index> order(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    order.resize(0);
    for (Index j = 0; j < m; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + k_lap, order.end(),
                      [&](Index a, Index b) {
                        if (D(i, a) != D(i, b)) return D(i, a) < D(i, b);
                        return a < b;
                      });
    for (int t = 0; t < k_lap; ++t) {
      Index j = order[static_cast<size_t>(t)];
      double w = std::exp(-D(i, j) * D(i, j) / tau);
      W(i, j) = w;
      W(j, i) = w;
    }
  }

  Vector deg = W.rowwise().sum();
  Vector inv_sqrt(m);
  for (Index i = 0; i < m; ++i) {
    inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  }

  Matrix L = Matrix::Identity(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      if (W(i, j) != 0.0) {
        double v = -W(i, j) * inv_sqrt[i] * inv_sqrt[j];
        L(i, j) = v;
        L(j, i) = v;
      }
    }
  }
  return {std::move(L), k_lap, tau};
}

Matrix principal_submatrix(const Matrix& M, std::span<const Index> idx) {
  if (M.rows() != M.cols()) {
    throw ValidationError("principal_submatrix: matrix must be square");
  }
  std::vector<uint8_t> seen(static_cast<size_t>(M.rows()), 0);
  for (Index i : idx) {
    if (i < 0 || i >= M.rows()) {
      throw ValidationError("principal_submatrix: index " + std::to_string(i) +
                            " out of range");
    }
    if (seen[static_cast<size_t>(i)]++) {
      throw ValidationError("principal_submatrix: duplicate index " +
                            std::to_string(i));
    }
  }
  Index k = static_cast<Index>(idx.size());
  Matrix out(k, k);
  for (Index r = 0; r < k; ++r) {
    for (Index c = 0; c < k; ++c) {
      out(r, c) = M(idx[static_cast<size_t>(r)], idx[static_cast<size_t>(c)]);
    }
  }
  return out;
}

Matrix gather_rows(const Matrix& X, std::span<const Index> idx) {
  Matrix out(static_cast<Index>(idx.size()), X.cols());
  for (Index r = 0; r < out.rows(); ++r) {
    Index i = idx[static_cast<size_t>(r)];
    if (i < 0 || i >= X.rows()) {
      throw ValidationError("gather_rows: index out of range");
    }
    out.row(r) = X.row(i);
  }
  return out;
}

}  // namespace latlapmed
