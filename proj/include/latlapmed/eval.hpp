// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <latlapmed/common.hpp>

namespace latlapmed {

// Positive class is +1 (high-utility anomaly).  Rates with an empty
// denominator are 0.
struct MetricRecord {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double fpr = 0, fnr = 0, recall = 0, precision = 0;
};

MetricRecord confusion(const Eigen::VectorXi& predicted,
                       const Eigen::VectorXi& truth);

struct PRPoint {
  double phi = 0;
  double recall = 0;
  double precision = 0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // sorted by recall
  double auc = 0;
};

// Sorts by (recall, precision) and integrates by trapezoid with a flat
// anchor from recall 0 to the first point; no extrapolation past the last
// point.  A single point (r, p) gives p * r.
PRCurve make_pr_curve(std::vector<PRPoint> points);

using SweepRunner = std::function<MetricRecord(double phi, uint64_t seed)>;

struct SweepCell {
  double phi = 0;
  Index trial = 0;
  MetricRecord record;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // phi-major, trial-minor
  PRCurve curve;
};

// One fit per (phi, seed) task; the curve holds per-phi means of recall and
// precision across seeds.  A failed fit aborts the sweep with the failing
// (phi, trial) named in the error.
SweepResult pr_sweep_detailed(const SweepRunner& runner,
                              std::span<const double> phis,
                              std::span<const uint64_t> seeds, int workers = 1);

PRCurve pr_sweep(const SweepRunner& runner, std::span<const double> phis,
                 std::span<const uint64_t> seeds, int workers = 1);

}  // namespace latlapmed
