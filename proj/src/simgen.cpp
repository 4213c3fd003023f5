// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/simgen.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace latlapmed {
namespace {

void validate(const SimConfig& cfg) {
  if (cfg.n < 2) throw ValidationError("simgen: n must be >= 2");
  if (cfg.p < 1) throw ValidationError("simgen: p must be >= 1");
  if (!(cfg.df > 2.0)) throw ValidationError("simgen: df must exceed 2");
  if (!(cfg.phi_true > 0.0 && cfg.phi_true < 1.0)) {
    throw ValidationError("simgen: phi_true must lie in (0, 1)");
  }
  if (!(cfg.top_utility_frac > 0.0 && cfg.top_utility_frac <= 1.0)) {
    throw ValidationError("simgen: top_utility_frac must lie in (0, 1]");
  }
  if (!(cfg.label_frac > 0.0 && cfg.label_frac <= 1.0)) {
    throw ValidationError("simgen: label_frac must lie in (0, 1]");
  }
  if (cfg.n_components < 1) {
    throw ValidationError("simgen: n_components must be >= 1");
  }
  Index cmax = cfg.comp_size_max > 0 ? cfg.comp_size_max : (cfg.p + 1) / 2;
  if (cfg.comp_size_min < 1 || cmax < cfg.comp_size_min || cmax > cfg.p) {
    throw ValidationError("simgen: component size range invalid");
  }
}

// First k of a partial Fisher-Yates shuffle of 0..p-1.
std::vector<Index> draw_subset(Index p, Index k, Rng& rng) {
  std::vector<Index> pool(static_cast<size_t>(p));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index t = 0; t < k; ++t) {
    Index j = t + static_cast<Index>(rng.below(static_cast<uint64_t>(p - t)));
    std::swap(pool[static_cast<size_t>(t)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Matrix random_scale_matrix(Index p, Rng& rng) {
  Matrix A(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) A(i, j) = rng.normal();
  }
  return A * A.transpose() / static_cast<double>(p) +
         0.1 * Matrix::Identity(p, p);
}

Matrix sample_latent_t(Index n, const Matrix& sigma, double df, Rng& rng) {
  Index p = sigma.rows();
  if (sigma.cols() != p) throw ValidationError("sample_latent_t: sigma not square");
  if (!(df > 2.0)) throw ValidationError("sample_latent_t: df must exceed 2");
  Eigen::LLT<Matrix> chol(sigma);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("sample_latent_t: sigma is not positive definite");
  }
  Matrix L = chol.matrixL();
  Matrix X(n, p);
  Vector g(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) g[j] = rng.normal();
    double u = rng.chi_square(df);
    X.row(i) = (L * g).transpose() * std::sqrt(df / u);
  }
  return X;
}

Vector score_points(const Matrix& X,
                    const std::vector<std::vector<Index>>& comps) {
  Index n = X.rows(), p = X.cols();
  if (comps.empty()) throw ValidationError("score_points: no components");
  for (const auto& c : comps) {
    if (c.empty() || static_cast<Index>(c.size()) >= p) {
      throw ValidationError(
          "score_points: each component must be a nonempty proper subset of columns");
    }
    for (Index j : c) {
      if (j < 0 || j >= p) {
        throw ValidationError("score_points: column index out of range");
      }
    }
  }
  Vector total = X.rowwise().sum();
  Vector best = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  for (const auto& c : comps) {
    double nc = static_cast<double>(c.size());
    double rest = static_cast<double>(p) - nc;
    for (Index i = 0; i < n; ++i) {
      double in_sum = 0;
      for (Index j : c) in_sum += X(i, j);
      double contrast = in_sum / nc - (total[i] - in_sum) / rest;
      if (contrast > best[i]) best[i] = contrast;
    }
  }
  return best;
}

Dataset generate(const SimConfig& cfg) {
  validate(cfg);
  Index n = cfg.n, p = cfg.p;

  Rng scale_rng = substream(cfg.seed, "sim:scale");
  Matrix sigma = random_scale_matrix(p, scale_rng);

  Rng latent_rng = substream(cfg.seed, "sim:latent");
  Matrix X = sample_latent_t(n, sigma, cfg.df, latent_rng).cwiseAbs();

  Rng comp_rng = substream(cfg.seed, "sim:components");
  Index cmax = cfg.comp_size_max > 0 ? cfg.comp_size_max : (p + 1) / 2;
  std::vector<std::vector<Index>> comps;
  if (p == 1) {
    throw ValidationError("simgen: scoring needs at least 2 feature columns");
  }
  for (int h = 0; h < cfg.n_components; ++h) {
    Index span = cmax - cfg.comp_size_min + 1;
    Index size = cfg.comp_size_min +
                 static_cast<Index>(comp_rng.below(static_cast<uint64_t>(span)));
    size = std::min(size, p - 1);  // proper subset
    comps.push_back(draw_subset(p, size, comp_rng));
  }
  Vector scores = score_points(X, comps);

  // anomalies: highest scores, ties toward the lower index
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  Index n_anom = ceil_fraction(cfg.phi_true, n);
  if (n_anom < 1 || n_anom >= n) {
    throw ValidationError("simgen: anomaly count out of range");
  }
  Index n_high = ceil_fraction(cfg.top_utility_frac, n_anom);

  std::vector<uint8_t> truth_anomaly(static_cast<size_t>(n), 0);
  std::vector<int8_t> truth_utility(static_cast<size_t>(n), -1);
  std::vector<Index> high, low;
  for (Index t = 0; t < n_anom; ++t) {
    Index i = order[static_cast<size_t>(t)];
    truth_anomaly[static_cast<size_t>(i)] = 1;
    if (t < n_high) {
      truth_utility[static_cast<size_t>(i)] = 1;
      high.push_back(i);
    } else {
      low.push_back(i);
    }
  }

  Index n_reveal = static_cast<Index>(
      std::llround(cfg.label_frac * static_cast<double>(n_high)));
  if (n_reveal < 1) {
    throw ValidationError(
        "simgen: config reveals no labels; increase n or label_frac");
  }
  if (n_reveal > static_cast<Index>(low.size())) {
    throw ValidationError(
        "simgen: not enough low-utility anomalies to mirror the revealed labels");
  }

  Rng reveal_rng = substream(cfg.seed, "label-reveal");
  auto pick = [&](std::vector<Index>& from, Index k) {
    for (Index t = 0; t < k; ++t) {
      Index j = t + static_cast<Index>(
                        reveal_rng.below(static_cast<uint64_t>(from.size()) - t));
      std::swap(from[static_cast<size_t>(t)], from[static_cast<size_t>(j)]);
    }
    return std::vector<Index>(from.begin(), from.begin() + k);
  };
  std::vector<int8_t> labels(static_cast<size_t>(n), 0);
  for (Index i : pick(high, n_reveal)) labels[static_cast<size_t>(i)] = 1;
  for (Index i : pick(low, n_reveal)) labels[static_cast<size_t>(i)] = -1;

  Dataset d;
  d.features = std::move(X);
  d.labels = std::move(labels);
  d.truth_anomaly = std::move(truth_anomaly);
  d.truth_utility = std::move(truth_utility);
  d.feature_names.reserve(static_cast<size_t>(p));
  for (Index j = 0; j < p; ++j) d.feature_names.push_back("x" + std::to_string(j));
  d.validate();
  return d;
}

}  // namespace latlapmed
