// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/eval.hpp>

#include <algorithm>
#include <string>

namespace latlapmed {

MetricRecord confusion(const Eigen::VectorXi& predicted,
                       const Eigen::VectorXi& truth) {
  if (predicted.size() != truth.size()) {
    throw ValidationError("confusion: size mismatch");
  }
  MetricRecord m;
  for (Index i = 0; i < predicted.size(); ++i) {
    int pr = predicted[i], tr = truth[i];
    if ((pr != 1 && pr != -1) || (tr != 1 && tr != -1)) {
      throw ValidationError("confusion: entries must be +1 or -1");
    }
    if (tr == 1) {
      (pr == 1 ? m.tp : m.fn) += 1;
    } else {
      (pr == 1 ? m.fp : m.tn) += 1;
    }
  }
  auto rate = [](long num, long den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.fpr = rate(m.fp, m.fp + m.tn);
  m.fnr = rate(m.fn, m.fn + m.tp);
  m.recall = rate(m.tp, m.tp + m.fn);
  m.precision = rate(m.tp, m.tp + m.fp);
  return m;
}

PRCurve make_pr_curve(std::vector<PRPoint> points) {
  if (points.empty()) {
    throw ValidationError("make_pr_curve: no points");
  }
  std::sort(points.begin(), points.end(), [](const PRPoint& a, const PRPoint& b) {
    if (a.recall != b.recall) return a.recall < b.recall;
    return a.precision < b.precision;
  });
  // flat anchor from recall 0; trapezoids between points; nothing past the end
  double auc = points.front().recall * points.front().precision;
  for (size_t i = 1; i < points.size(); ++i) {
    auc += (points[i].recall - points[i - 1].recall) *
           0.5 * (points[i].precision + points[i - 1].precision);
  }
  PRCurve c;
  c.points = std::move(points);
  c.auc = auc;
  return c;
}

SweepResult pr_sweep_detailed(const SweepRunner& runner,
                              std::span<const double> phis,
                              std::span<const uint64_t> seeds, int workers) {
  if (phis.empty()) throw ValidationError("pr_sweep: empty phi grid");
  if (seeds.empty()) throw ValidationError("pr_sweep: no trials");
  Index np = static_cast<Index>(phis.size());
  Index nt = static_cast<Index>(seeds.size());
  std::vector<MetricRecord> cells(static_cast<size_t>(np * nt));
  std::vector<std::string> failures(static_cast<size_t>(np * nt));

  parallel_tasks(np * nt, workers, [&](Index task) {
    Index pi = task / nt;
    Index ti = task % nt;
    try {
      cells[static_cast<size_t>(task)] =
          runner(phis[static_cast<size_t>(pi)], seeds[static_cast<size_t>(ti)]);
    } catch (const std::exception& e) {
      failures[static_cast<size_t>(task)] = e.what();
    }
  });
  for (Index task = 0; task < np * nt; ++task) {
    if (!failures[static_cast<size_t>(task)].empty()) {
      Index pi = task / nt, ti = task % nt;
      throw NumericalError(
          "pr_sweep: fit failed at phi=" +
          std::to_string(phis[static_cast<size_t>(pi)]) + " trial=" +
          std::to_string(ti) + ": " + failures[static_cast<size_t>(task)]);
    }
  }

  SweepResult out;
  std::vector<PRPoint> pts;
  for (Index pi = 0; pi < np; ++pi) {
    double r = 0, p = 0;
    for (Index ti = 0; ti < nt; ++ti) {
      const MetricRecord& m = cells[static_cast<size_t>(pi * nt + ti)];
      out.cells.push_back({phis[static_cast<size_t>(pi)], ti, m});
      r += m.recall;
      p += m.precision;
    }
    pts.push_back({phis[static_cast<size_t>(pi)], r / static_cast<double>(nt),
                   p / static_cast<double>(nt)});
  }
  out.curve = make_pr_curve(std::move(pts));
  return out;
}

PRCurve pr_sweep(const SweepRunner& runner, std::span<const double> phis,
                 std::span<const uint64_t> seeds, int workers) {
  return pr_sweep_detailed(runner, phis, seeds, workers).curve;
}

}  // namespace latlapmed
