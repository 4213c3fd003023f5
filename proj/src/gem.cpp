// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/gem.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace latlapmed {
namespace {

void validate_config(const GemConfig& cfg, Index n) {
  if (n < 2) throw ValidationError("init_gem: need at least 2 points");
  if (!(cfg.phi > 0.0 && cfg.phi < 1.0)) {
    throw ValidationError("gem: phi must lie in (0, 1)");
  }
  if (cfg.k_gem < 1) throw ValidationError("gem: k_gem must be >= 1");
  if (cfg.k_gem >= n) {
    throw ValidationError("gem: k_gem " + std::to_string(cfg.k_gem) +
                          " must be smaller than n = " + std::to_string(n));
  }
  if (!(cfg.rho >= 0.0)) throw ValidationError("gem: rho must be >= 0");
  if (cfg.candidate_width < 1) {
    throw ValidationError("gem: candidate_width must be >= 1");
  }
}

}  // namespace

GemState init_gem(const Matrix& X, const GemConfig& cfg, int workers) {
  Index n = X.rows();
  validate_config(cfg, n);
  if (!X.allFinite()) throw ValidationError("init_gem: non-finite features");

  Vector norms;
  if (cfg.metric == Metric::Cosine) {
    norms = X.rowwise().norm();
    for (Index i = 0; i < n; ++i) {
      if (norms[i] == 0.0) {
        throw ValidationError("init_gem: cosine metric undefined for all-zero row " +
                              std::to_string(i));
      }
    }
  }

  Index width = std::min<Index>(n - 1, static_cast<Index>(cfg.candidate_width) *
                                           cfg.k_gem);
  auto edges = std::make_shared<std::vector<std::vector<GemEdge>>>(
      static_cast<size_t>(n));

  // Streams one distance row at a time; no n x n matrix is ever formed.
  parallel_for_blocks(n, workers, [&](Index lo, Index hi) {
    std::vector<GemEdge> row;
    row.reserve(static_cast<size_t>(n - 1));
    for (Index i = lo; i < hi; ++i) {
      row.clear();
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double d;
        if (cfg.metric == Metric::Euclidean) {
          d = (X.row(i) - X.row(j)).norm();
        } else {
          double sim = X.row(i).dot(X.row(j)) / (norms[i] * norms[j]);
          d = std::clamp(1.0 - sim, 0.0, 2.0);
        }
        row.push_back({j, d});
      }
      std::partial_sort(row.begin(), row.begin() + width, row.end(),
                        [](const GemEdge& a, const GemEdge& b) {
                          if (a.base != b.base) return a.base < b.base;
                          return a.neighbor < b.neighbor;
                        });
      (*edges)[static_cast<size_t>(i)].assign(row.begin(), row.begin() + width);
    }
  });

  GemState s;
  s.base_edges = std::move(edges);
  s.config = cfg;
  s.n = n;
  s.penalties = Vector::Zero(n);
  s.anomaly_mask.assign(static_cast<size_t>(n), 0);
  s.scores = Vector::Zero(n);
  return s;
}

std::vector<std::vector<double>> penalized_edges(const GemState& s,
                                                 const Vector& d_hat,
                                                 const LabelView& labels,
                                                 double rho) {
  if (!s.base_edges || s.n == 0) {
    throw ValidationError("penalized_edges: uninitialized state");
  }
  if (d_hat.size() != s.n) {
    throw ValidationError("penalized_edges: d_hat length mismatch");
  }
  if (!d_hat.allFinite()) {
    throw ValidationError("penalized_edges: non-finite decision values");
  }
  if (!(rho >= 0.0)) throw ValidationError("penalized_edges: rho must be >= 0");

  std::vector<int8_t> sign(static_cast<size_t>(s.n), 0);
  for (size_t t = 0; t < labels.indices.size(); ++t) {
    Index i = labels.indices[t];
    if (i < 0 || i >= s.n) {
      throw ValidationError("penalized_edges: label index out of range");
    }
    sign[static_cast<size_t>(i)] = labels.signs[t];
  }

  size_t k = static_cast<size_t>(s.config.k_gem);
  std::vector<std::vector<double>> out(static_cast<size_t>(s.n));
  std::vector<double> buf;
  for (Index i = 0; i < s.n; ++i) {
    const auto& cand = (*s.base_edges)[static_cast<size_t>(i)];
    buf.resize(cand.size());
    for (size_t t = 0; t < cand.size(); ++t) {
      Index j = cand[t].neighbor;
      double dj = d_hat[j];
      bool stretch = dj > rho || sign[static_cast<size_t>(j)] == 1;
      buf[t] = cand[t].base + (stretch ? dj : 0.0);
    }
    std::partial_sort(buf.begin(), buf.begin() + static_cast<long>(k), buf.end());
    out[static_cast<size_t>(i)].assign(buf.begin(), buf.begin() + static_cast<long>(k));
  }
  return out;
}

Vector gem_scores(const std::vector<std::vector<double>>& edges) {
  Vector scores(static_cast<Index>(edges.size()));
  for (size_t i = 0; i < edges.size(); ++i) {
    scores[static_cast<Index>(i)] =
        std::accumulate(edges[i].begin(), edges[i].end(), 0.0);
  }
  return scores;
}

std::vector<uint8_t> entropy_set(const GemState& s,
                                 const std::vector<std::vector<double>>& penalized,
                                 double phi, std::span<const Index> forced) {
  if (static_cast<Index>(penalized.size()) != s.n) {
    throw ValidationError("entropy_set: edge list length mismatch");
  }
  if (!(phi > 0.0 && phi < 1.0)) {
    throw ValidationError("entropy_set: phi must lie in (0, 1)");
  }
  Vector scores = gem_scores(penalized);
  Index keep = s.n - ceil_fraction(phi, s.n);

  std::vector<Index> order(static_cast<size_t>(s.n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  std::vector<uint8_t> mask(static_cast<size_t>(s.n), 1);
  for (Index t = 0; t < keep; ++t) {
    mask[static_cast<size_t>(order[static_cast<size_t>(t)])] = 0;
  }
  for (Index f : forced) {
    if (f < 0 || f >= s.n) {
      throw ValidationError("entropy_set: forced index out of range");
    }
    mask[static_cast<size_t>(f)] = 1;
  }
  return mask;
}

}  // namespace latlapmed
