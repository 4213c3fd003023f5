// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <latlapmed/common.hpp>

namespace latlapmed {

// Labeled points in subset coordinates, ascending.
struct SubsetLabels {
  std::vector<Index> rows;
  std::vector<int8_t> signs;
};

struct DualProblem {
  Matrix Q;      // l x l, symmetric PSD
  Vector signs;  // +1 / -1
  double C = 0;
  double beta = 0;
};

struct DualSolution {
  Vector alphas;
  double bias = 0;
  double objective = 0;
  double kkt_residual = 0;
  std::vector<Index> support;  // alphas above 1e-6 * C
  long iterations = 0;
};

inline constexpr double kSupportTolScale = 1e-6;

// Factorization of M = I + 2 beta L K plus the label maps; everything
// needed to evaluate decision values after the solve.
struct DualModel {
  DualProblem problem;
  Eigen::PartialPivLU<Matrix> lu;  // of M
  std::vector<Index> labeled_rows;
  Vector signs;
  double rcond = 0;

  Index subset_size() const { return lu.rows(); }
  // Scatter signed alphas to subset length: v[r_s] = y_s * alpha_s.
  Vector expand_signed_alphas(const Vector& alphas) const;
};

// Assembles Q(i,j) = y_i y_j S(r_i, r_j) with S = K (I + 2 beta L K)^{-1},
// computed by a transpose solve against the LU factors of M.  Throws
// NumericalError when the condition estimate of M exceeds 1e12.
DualModel build_dual(const Matrix& K_sub, const Matrix& L_sub,
                     const SubsetLabels& labels, double C, double beta);

// Maximizes  sum a_i - a'Qa/2 + sum log(1 - a_i/C)  subject to y'a = 0,
// a >= 0, by pairwise coordinate ascent on the most violating pair with an
// exact one-dimensional Newton step.  The log barrier keeps a_i < C.
DualSolution solve_dual(const DualProblem& p, double tol = 1e-8,
                        long max_iter = 2000000);

// Thrown when the pair ascent stalls; carries the best iterate found.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& msg, DualSolution best)
      : NumericalError(msg), best_iterate(std::move(best)) {}
  DualSolution best_iterate;
};

// Median of y_s - f_s over support points; even counts average the middle
// two.  f is the decision value without bias.
double fit_bias(const Vector& decision_no_bias, const Vector& signs);

// f = K_cross M^{-1} (Jt Y alpha) + bias for query kernel block K_cross
// (m x a).  A query row equal to a subset row reproduces that point's
// training decision value.
Vector decision_values(const Matrix& K_cross, const DualModel& model,
                       const DualSolution& sol);

}  // namespace latlapmed
