// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace latlapmed {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Bad arguments, malformed files, broken preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ill-conditioned systems, non-convergence, numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Metric { Euclidean, Cosine };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

// ceil(phi * n) with a small backoff so decimal fractions that are not
// exactly representable do not bump the count up by one (0.05 * 7000 must
// give 350, not 351).
Index ceil_fraction(double phi, Index n);

// Runs fn(begin, end) over [0, n) split into contiguous blocks, one block
// per worker.  Results are deterministic as long as fn writes only inside
// its own range.  workers <= 0 means hardware concurrency.
void parallel_for_blocks(Index n, int workers,
                         const std::function<void(Index, Index)>& fn);

// Runs tasks[0..count) on a small pool.  Exceptions are collected and the
// one with the lowest task index is rethrown after all threads join.
void parallel_tasks(Index count, int workers,
                    const std::function<void(Index)>& task);

int default_workers();

}  // namespace latlapmed
