// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/med_solver.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace latlapmed {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_labels(const SubsetLabels& lab, Index a) {
  Index l = static_cast<Index>(lab.rows.size());
  if (l < 2) throw ValidationError("build_dual: need at least 2 labeled points");
  if (lab.signs.size() != lab.rows.size()) {
    throw ValidationError("build_dual: label row/sign size mismatch");
  }
  Index prev = -1;
  bool pos = false, neg = false;
  for (Index t = 0; t < l; ++t) {
    Index r = lab.rows[static_cast<size_t>(t)];
    if (r < 0 || r >= a) {
      throw ValidationError("build_dual: labeled row " + std::to_string(r) +
                            " outside subset of size " + std::to_string(a));
    }
    if (r <= prev) {
      throw ValidationError("build_dual: labeled rows must be ascending and unique");
    }
    prev = r;
    int8_t s = lab.signs[static_cast<size_t>(t)];
    if (s == 1) {
      pos = true;
    } else if (s == -1) {
      neg = true;
    } else {
      throw ValidationError("build_dual: label signs must be +1 or -1");
    }
  }
  if (!pos || !neg) {
    throw ValidationError("build_dual: both label classes required");
  }
}

// Exact projected KKT residual: min over the multiplier mu of the largest
// stationarity violation.  F_k = y_k g_k; free points need F_k = mu, points
// at zero need F_k <= mu (y=+1) or F_k >= mu (y=-1).
double projected_residual(const Vector& F, const Vector& alphas,
                          const Vector& y) {
  Index l = F.size();
  auto residual_at = [&](double mu) {
    double r = 0;
    for (Index k = 0; k < l; ++k) {
      if (alphas[k] > 0.0) {
        r = std::max(r, std::abs(F[k] - mu));
      } else if (y[k] > 0) {
        r = std::max(r, F[k] - mu);
      } else {
        r = std::max(r, mu - F[k]);
      }
    }
    return r;
  };
  double lo = F.minCoeff() - 1.0, hi = F.maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (residual_at(m1) <= residual_at(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return residual_at(0.5 * (lo + hi));
}

}  // namespace

Vector DualModel::expand_signed_alphas(const Vector& alphas) const {
  Vector v = Vector::Zero(subset_size());
  for (size_t t = 0; t < labeled_rows.size(); ++t) {
    v[labeled_rows[t]] = signs[static_cast<Index>(t)] * alphas[static_cast<Index>(t)];
  }
  return v;
}

DualModel build_dual(const Matrix& K_sub, const Matrix& L_sub,
                     const SubsetLabels& labels, double C, double beta) {
  Index a = K_sub.rows();
  if (K_sub.cols() != a) throw ValidationError("build_dual: K must be square");
  if (L_sub.rows() != a || L_sub.cols() != a) {
    throw ValidationError("build_dual: L must match K");
  }
  if (!(C > 0)) throw ValidationError("build_dual: C must be positive");
  if (!(beta >= 0)) throw ValidationError("build_dual: beta must be >= 0");
  validate_labels(labels, a);

  Matrix M = Matrix::Identity(a, a) + 2.0 * beta * (L_sub * K_sub);
  Eigen::PartialPivLU<Matrix> lu(M);
  double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw NumericalError(
        "build_dual: system I + 2 beta L K is near singular (rcond = " +
        std::to_string(rcond) + ")");
  }

  // S = K M^{-1}, taken through the factorization rather than an inverse.
  Matrix Zt = lu.transpose().solve(K_sub.transpose());
  Matrix S = Zt.transpose();

  Index l = static_cast<Index>(labels.rows.size());
  Vector signs(l);
  for (Index t = 0; t < l; ++t) signs[t] = labels.signs[static_cast<size_t>(t)];

  Matrix Q(l, l);
  for (Index i = 0; i < l; ++i) {
    for (Index j = 0; j < l; ++j) {
      Q(i, j) = signs[i] * signs[j] *
                S(labels.rows[static_cast<size_t>(i)],
                  labels.rows[static_cast<size_t>(j)]);
    }
  }
  Q = (0.5 * (Q + Q.transpose())).eval();

  DualModel m{DualProblem{std::move(Q), signs, C, beta}, std::move(lu),
              labels.rows, signs, rcond};
  return m;
}

DualSolution solve_dual(const DualProblem& p, double tol, long max_iter) {
  Index l = p.Q.rows();
  if (p.Q.cols() != l || p.signs.size() != l) {
    throw ValidationError("solve_dual: inconsistent problem sizes");
  }
  if (!(p.C > 0)) throw ValidationError("solve_dual: C must be positive");
  if (!(tol > 0)) throw ValidationError("solve_dual: tolerance must be positive");
  bool pos = false, neg = false;
  for (Index k = 0; k < l; ++k) {
    if (p.signs[k] == 1.0) {
      pos = true;
    } else if (p.signs[k] == -1.0) {
      neg = true;
    } else {
      throw ValidationError("solve_dual: signs must be +1 or -1");
    }
  }
  if (!pos || !neg) {
    throw ValidationError(
        "solve_dual: single-class labels make the equality constraint infeasible");
  }

  const double C = p.C;
  const double cap = C * (1.0 - 1e-12);
  const Matrix& Q = p.Q;
  const Vector& y = p.signs;

  // interior start on the constraint plane
  Vector alpha = Vector::Constant(l, std::min(0.1, C / 100.0));
  alpha -= (y.dot(alpha) / static_cast<double>(l)) * y;
  for (Index k = 0; k < l; ++k) alpha[k] = std::clamp(alpha[k], 0.0, cap);

  Vector q = Q * alpha;  // Q alpha, maintained incrementally
  Vector F(l);
  auto refresh_F = [&] {
    for (Index k = 0; k < l; ++k) {
      F[k] = y[k] * (1.0 - q[k] - 1.0 / (C - alpha[k]));
    }
  };

  long iter = 0;
  double viol = kInf;
  for (; iter < max_iter; ++iter) {
    refresh_F();
    Index bi = -1, bj = -1;
    for (Index k = 0; k < l; ++k) {
      bool up = y[k] > 0 || alpha[k] > 0.0;
      bool down = y[k] < 0 || alpha[k] > 0.0;
      if (up && (bi < 0 || F[k] > F[bi])) bi = k;
      if (down && (bj < 0 || F[k] < F[bj])) bj = k;
    }
    viol = F[bi] - F[bj];
    if (viol <= tol || bi == bj) break;

    // ascend along alpha_i += y_i t, alpha_j -= y_j t with t in [0, hi]
    double hi = y[bi] > 0 ? cap - alpha[bi] : alpha[bi];
    hi = std::min(hi, y[bj] > 0 ? alpha[bj] : cap - alpha[bj]);
    if (!(hi > 0)) break;  // blocked pair; certificate below decides
    const bool i_hits_zero = y[bi] < 0 && alpha[bi] == hi;
    const bool j_hits_zero = y[bj] > 0 && alpha[bj] == hi;

    const double ai = y[bi] * Q(bi, bi) - y[bj] * Q(bi, bj);
    const double aj = y[bi] * Q(bi, bj) - y[bj] * Q(bj, bj);
    auto dphi = [&](double t) {
      double gi = 1.0 - (q[bi] + t * ai) - 1.0 / (C - (alpha[bi] + y[bi] * t));
      double gj = 1.0 - (q[bj] + t * aj) - 1.0 / (C - (alpha[bj] - y[bj] * t));
      return y[bi] * gi - y[bj] * gj;
    };

    double t;
    if (dphi(hi) >= 0.0) {
      t = hi;
    } else {
      // safeguarded Newton for the root of the strictly decreasing dphi
      double tl = 0.0, th = hi;
      t = 0.0;
      for (int n = 0; n < 100; ++n) {
        double d1 = dphi(t);
        if (d1 > 0) {
          tl = t;
        } else {
          th = t;
        }
        double bi_t = C - (alpha[bi] + y[bi] * t);
        double bj_t = C - (alpha[bj] - y[bj] * t);
        double d2 = -(Q(bi, bi) - 2.0 * y[bi] * y[bj] * Q(bi, bj) + Q(bj, bj)) -
                    1.0 / (bi_t * bi_t) - 1.0 / (bj_t * bj_t);
        double tn = t - d1 / d2;
        if (!(tn > tl && tn < th)) tn = 0.5 * (tl + th);
        if (std::abs(tn - t) <= 1e-15 * std::max(1.0, std::abs(tn))) {
          t = tn;
          break;
        }
        t = tn;
      }
    }

    alpha[bi] += y[bi] * t;
    alpha[bj] -= y[bj] * t;
    if (t == hi) {
      if (i_hits_zero) alpha[bi] = 0.0;
      if (j_hits_zero) alpha[bj] = 0.0;
    }
    alpha[bi] = std::clamp(alpha[bi], 0.0, cap);
    alpha[bj] = std::clamp(alpha[bj], 0.0, cap);
    if ((iter & 255) == 255) {
      q = Q * alpha;  // periodic refresh against drift
    } else {
      q += t * (y[bi] * Q.col(bi) - y[bj] * Q.col(bj));
    }
  }

  refresh_F();
  DualSolution sol;
  sol.alphas = alpha;
  sol.iterations = iter;
  sol.kkt_residual = projected_residual(F, alpha, y);
  double barrier = 0;
  for (Index k = 0; k < l; ++k) barrier += std::log1p(-alpha[k] / C);
  sol.objective = alpha.sum() - 0.5 * alpha.dot(q) + barrier;
  double support_tol = kSupportTolScale * C;
  for (Index k = 0; k < l; ++k) {
    if (alpha[k] > support_tol) sol.support.push_back(k);
  }
  if (sol.kkt_residual > tol && viol > tol) {
    throw ConvergenceError(
        "solve_dual: pair ascent stalled after " + std::to_string(iter) +
            " steps (residual " + std::to_string(sol.kkt_residual) + ")",
        sol);
  }
  return sol;
}

double fit_bias(const Vector& decision_no_bias, const Vector& signs) {
  Index m = decision_no_bias.size();
  if (m == 0) {
    throw ValidationError("fit_bias: empty support set");
  }
  if (signs.size() != m) throw ValidationError("fit_bias: size mismatch");
  std::vector<double> r(static_cast<size_t>(m));
  for (Index k = 0; k < m; ++k) r[static_cast<size_t>(k)] = signs[k] - decision_no_bias[k];
  std::sort(r.begin(), r.end());
  size_t mid = r.size() / 2;
  if (r.size() % 2 == 1) return r[mid];
  return 0.5 * (r[mid - 1] + r[mid]);
}

Vector decision_values(const Matrix& K_cross, const DualModel& model,
                       const DualSolution& sol) {
  if (K_cross.cols() != model.subset_size()) {
    throw ValidationError("decision_values: kernel block width must equal subset size");
  }
  if (sol.alphas.size() != static_cast<Index>(model.labeled_rows.size())) {
    throw ValidationError("decision_values: alpha length mismatch");
  }
  Vector v = model.expand_signed_alphas(sol.alphas);
  Vector w = model.lu.solve(v);
  return (K_cross * w).array() + sol.bias;
}

}  // namespace latlapmed
