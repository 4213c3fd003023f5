// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/latlapmed.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace latlapmed {
namespace {

void validate_fit_config(const FitConfig& cfg) {
  if (!(cfg.phi > 0.0 && cfg.phi < 1.0)) {
    throw ValidationError("fit: phi must lie in (0, 1)");
  }
  if (!(cfg.rho >= 0.0)) throw ValidationError("fit: rho must be >= 0");
  if (!(cfg.C > 0.0)) throw ValidationError("fit: C must be positive");
  if (cfg.beta_rule == BetaRule::Fixed && !(cfg.beta_fixed >= 0.0)) {
    throw ValidationError("fit: fixed beta must be >= 0");
  }
  if (cfg.k_lap < 1) throw ValidationError("fit: k_lap must be >= 1");
  if (!(cfg.tau > 0.0)) throw ValidationError("fit: tau must be positive");
  if (cfg.max_em_iters < 1) {
    throw ValidationError("fit: max_em_iters must be >= 1");
  }
  if (!(cfg.em_tol >= 0.0)) throw ValidationError("fit: em_tol must be >= 0");
}

void require_both_classes(const LabelView& lv) {
  bool pos = false, neg = false;
  for (int8_t s : lv.signs) {
    pos = pos || s == 1;
    neg = neg || s == -1;
  }
  if (!pos || !neg) {
    throw ValidationError("fit: both label classes must be observed");
  }
}

double beta_for(const FitConfig& cfg, Index labeled, Index subset_size) {
  if (cfg.beta_rule == BetaRule::Fixed) return cfg.beta_fixed;
  double a = static_cast<double>(subset_size);
  return 10.0 * cfg.C * static_cast<double>(labeled) / (a * a);
}

struct MStep {
  DualSolution sol;
  Vector d_sub;  // decision values with bias on the subset
  DecisionModel model;
  double beta = 0;
  int k_lap_used = 0;
  bool k_lap_clamped = false;
};

// One Laplacian-regularized margin solve on X rows given by subset.
MStep m_step(const Matrix& X, const std::vector<Index>& subset,
             const LabelView& lv, const FitConfig& cfg) {
  Index a = static_cast<Index>(subset.size());
  if (a < 2) {
    throw ValidationError("fit: anomalous subset has fewer than 2 points");
  }

  SubsetLabels sl;
  {
    size_t t = 0;
    for (size_t s = 0; s < subset.size() && t < lv.indices.size(); ++s) {
      if (subset[s] == lv.indices[t]) {
        sl.rows.push_back(static_cast<Index>(s));
        sl.signs.push_back(lv.signs[t]);
        ++t;
      }
    }
    if (sl.rows.size() != lv.indices.size()) {
      throw ValidationError("fit: a labeled point fell outside the anomalous subset");
    }
  }

  Matrix Xs = gather_rows(X, subset);
  KernelMatrix K = gram(Xs, cfg.kernel);

  int k_eff = std::min<int>(cfg.k_lap, static_cast<int>(a) - 1);
  LaplacianMatrix L = normalized_laplacian(Xs, k_eff, cfg.tau, cfg.metric);

  double beta = beta_for(cfg, static_cast<Index>(lv.indices.size()), a);
  DualModel dm = build_dual(K.values, L.values, sl, cfg.C, beta);
  DualSolution sol = solve_dual(dm.problem, cfg.solver_tol, cfg.solver_max_iter);

  Vector v = dm.expand_signed_alphas(sol.alphas);
  Vector w = dm.lu.solve(v);
  Vector f0 = K.values * w;  // without bias

  Vector fs(static_cast<Index>(sol.support.size()));
  Vector ys(static_cast<Index>(sol.support.size()));
  for (Index t = 0; t < fs.size(); ++t) {
    Index s = sol.support[static_cast<size_t>(t)];
    fs[t] = f0[sl.rows[static_cast<size_t>(s)]];
    ys[t] = dm.signs[s];
  }
  sol.bias = fit_bias(fs, ys);

  MStep out;
  out.d_sub = f0.array() + sol.bias;
  out.model = DecisionModel{std::move(Xs), std::move(w), sol.bias, cfg.kernel};
  out.sol = std::move(sol);
  out.beta = beta;
  out.k_lap_used = k_eff;
  out.k_lap_clamped = k_eff != cfg.k_lap;
  return out;
}

std::vector<Index> mask_indices(const std::vector<uint8_t>& mask) {
  std::vector<Index> idx;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(static_cast<Index>(i));
  }
  return idx;
}

void count_errors(const Dataset& d, const std::vector<uint8_t>& mask,
                  const Vector& d_hat, IterationRecord& rec) {
  if (!d.truth_utility) return;
  long fp = 0, fn = 0;
  for (Index i = 0; i < d.n(); ++i) {
    bool predicted_high = mask[static_cast<size_t>(i)] && d_hat[i] > 0.0;
    bool truth_high = (*d.truth_utility)[static_cast<size_t>(i)] == 1;
    if (predicted_high && !truth_high) ++fp;
    if (!predicted_high && truth_high) ++fn;
  }
  rec.fp = fp;
  rec.fn = fn;
}

}  // namespace

Vector DecisionModel::evaluate(const Matrix& queries) const {
  if (queries.cols() != subset_features.cols()) {
    throw ValidationError("DecisionModel: query dimension mismatch");
  }
  Matrix K_cross = cross_gram(queries, subset_features, kernel);
  return (K_cross * weights).array() + bias;
}

FitResult fit_latlapmed(const Dataset& d, const FitConfig& cfg,
                        const GemState* shared_gem, const FitObserver& observer) {
  validate_fit_config(cfg);
  d.validate();
  LabelView lv = label_view(d);
  require_both_classes(lv);

  GemConfig gc;
  gc.phi = cfg.phi;
  gc.k_gem = cfg.k_gem;
  gc.rho = cfg.rho;
  gc.metric = cfg.metric;
  gc.candidate_width = cfg.candidate_width;

  GemState gem;
  if (shared_gem) {
    if (shared_gem->n != d.n()) {
      throw ValidationError("fit: shared GEM state size mismatch");
    }
    if (shared_gem->config.k_gem != gc.k_gem ||
        shared_gem->config.metric != gc.metric) {
      throw ValidationError("fit: shared GEM state built with different edges");
    }
    gem = *shared_gem;
    gem.config = gc;
  } else {
    gem = init_gem(d.features, gc);
  }

  Index n = d.n();
  Vector d_hat = Vector::Zero(n);
  std::vector<uint8_t> prev_mask;
  std::vector<std::vector<uint8_t>> seen;

  FitResult result;
  struct Snapshot {
    std::vector<uint8_t> mask;
    DualSolution sol;
    Vector d_hat;
    DecisionModel model;
    std::vector<Index> subset;
    double objective = -std::numeric_limits<double>::infinity();
  } best;
  bool have_best = false;

  int iter = 0;
  bool converged = false;
  bool cycled = false;
  Index last_changed = std::numeric_limits<Index>::max();

  while (iter < cfg.max_em_iters) {
    auto edges = penalized_edges(gem, d_hat, lv, cfg.rho);
    auto mask = entropy_set(gem, edges, cfg.phi, lv.indices);

    if (!prev_mask.empty() && mask == prev_mask) {
      converged = true;  // fixed point; previous M-step already optimal
      break;
    }
    for (const auto& m : seen) {
      if (m == mask) {
        cycled = true;
        break;
      }
    }
    if (cycled) break;  // revisited mask; fall back to the best iterate

    Index changed;
    if (prev_mask.empty()) {
      changed = static_cast<Index>(
          std::count(mask.begin(), mask.end(), uint8_t{1}));
    } else {
      changed = 0;
      for (size_t i = 0; i < mask.size(); ++i) {
        changed += mask[i] != prev_mask[i];
      }
    }

    ++iter;
    if (observer) observer(iter, mask);

    std::vector<Index> subset = mask_indices(mask);
    MStep ms = m_step(d.features, subset, lv, cfg);

    d_hat.setZero();
    for (size_t s = 0; s < subset.size(); ++s) {
      d_hat[subset[s]] = ms.d_sub[static_cast<Index>(s)];
    }

    IterationRecord rec;
    rec.iter = iter;
    rec.objective = ms.sol.objective;
    rec.anomaly_count = static_cast<Index>(subset.size());
    rec.changed = changed;
    rec.beta = ms.beta;
    rec.k_lap_used = ms.k_lap_used;
    rec.k_lap_clamped = ms.k_lap_clamped;
    count_errors(d, mask, d_hat, rec);
    result.trace.push_back(rec);

    gem.scores = gem_scores(edges);
    gem.anomaly_mask = mask;
    gem.penalties = d_hat;

    if (!have_best || ms.sol.objective > best.objective) {
      have_best = true;
      best = Snapshot{mask, ms.sol, d_hat, ms.model, subset, ms.sol.objective};
    }
    result.anomaly_mask = mask;
    result.dual = std::move(ms.sol);
    result.decision_values = d_hat;
    result.model = std::move(ms.model);
    result.subset = std::move(subset);

    // em_tol relaxation: two consecutive small mask updates count as converged
    if (cfg.em_tol > 0.0 && !prev_mask.empty()) {
      double lim = cfg.em_tol * static_cast<double>(n);
      if (static_cast<double>(changed) < lim &&
          static_cast<double>(last_changed) < lim) {
        converged = true;
      }
    }
    last_changed = changed;
    seen.push_back(mask);
    prev_mask = std::move(mask);
    if (converged) break;
  }

  if (cycled && have_best) {
    result.anomaly_mask = std::move(best.mask);
    result.dual = std::move(best.sol);
    result.decision_values = std::move(best.d_hat);
    result.model = std::move(best.model);
    result.subset = std::move(best.subset);
  }
  result.iterations = iter;
  result.converged = converged;
  return result;
}

FitResult fit_two_stage(const Dataset& d, const FitConfig& cfg,
                        const GemState* shared_gem) {
  FitConfig one = cfg;
  one.max_em_iters = 1;
  return fit_latlapmed(d, one, shared_gem);
}

LapmedResult fit_lapmed(const Dataset& d,
                        const std::optional<std::vector<uint8_t>>& subset_mask,
                        const FitConfig& cfg) {
  validate_fit_config(cfg);
  d.validate();
  LabelView lv = label_view(d);
  require_both_classes(lv);

  std::vector<Index> subset;
  if (subset_mask) {
    if (static_cast<Index>(subset_mask->size()) != d.n()) {
      throw ValidationError("fit_lapmed: subset mask length mismatch");
    }
    subset = mask_indices(*subset_mask);
  } else {
    subset.resize(static_cast<size_t>(d.n()));
    for (Index i = 0; i < d.n(); ++i) subset[static_cast<size_t>(i)] = i;
  }

  MStep ms = m_step(d.features, subset, lv, cfg);
  LapmedResult r;
  r.dual = std::move(ms.sol);
  r.model = std::move(ms.model);
  r.subset = std::move(subset);
  r.subset_decision_values = std::move(ms.d_sub);
  return r;
}

Eigen::VectorXi predict(const FitResult& r) {
  Index n = static_cast<Index>(r.anomaly_mask.size());
  Eigen::VectorXi out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = r.anomaly_mask[static_cast<size_t>(i)] && r.decision_values[i] > 0.0
                 ? 1
                 : -1;
  }
  return out;
}

Eigen::VectorXi predict(const FitResult& r, const Matrix& queries) {
  Vector f = r.model.evaluate(queries);
  Eigen::VectorXi out(f.size());
  for (Index i = 0; i < f.size(); ++i) out[i] = f[i] > 0.0 ? 1 : -1;
  return out;
}

Eigen::VectorXi predict_lapmed(const LapmedResult& r, Index n) {
  Eigen::VectorXi out = Eigen::VectorXi::Constant(n, -1);
  for (size_t s = 0; s < r.subset.size(); ++s) {
    Index i = r.subset[s];
    if (i < 0 || i >= n) throw ValidationError("predict_lapmed: subset outside range");
    out[i] = r.subset_decision_values[static_cast<Index>(s)] > 0.0 ? 1 : -1;
  }
  return out;
}

}  // namespace latlapmed
