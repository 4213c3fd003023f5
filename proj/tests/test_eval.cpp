// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <array>
#include <cmath>

#include <latlapmed/eval.hpp>

using namespace latlapmed;

namespace {

Eigen::VectorXi signs(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Index>(v.size()));
  Index i = 0;
  for (int x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("confusion counts every quadrant and derives the rates") {
  Eigen::VectorXi pred = signs({1, 1, -1, -1, 1, -1});
  Eigen::VectorXi truth = signs({1, -1, 1, -1, 1, -1});
  MetricRecord m = confusion(pred, truth);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 2);
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.fpr == doctest::Approx(1.0 / 3.0));
  CHECK(m.fnr == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("confusion treats empty denominators as zero rates") {
  // no true positives anywhere: recall denominator empty
  MetricRecord m = confusion(signs({-1, -1}), signs({-1, -1}));
  CHECK(m.recall == 0.0);
  CHECK(m.precision == 0.0);
  CHECK(m.fnr == 0.0);
  CHECK(m.fpr == 0.0);
  CHECK(m.tn == 2);

  CHECK_THROWS_AS(confusion(signs({1}), signs({1, -1})), ValidationError);
  CHECK_THROWS_AS(confusion(signs({0}), signs({1})), ValidationError);
  CHECK_THROWS_AS(confusion(signs({1}), signs({2})), ValidationError);
}

TEST_CASE("pr curve integrates the hand-checked three point case") {
  // sorted by recall: (0.2, 0.9), (0.5, 0.7), (0.8, 0.4)
  // anchor: 0.2 * 0.9 = 0.18
  // trapezoid 1: 0.3 * (0.9 + 0.7)/2 = 0.24
  // trapezoid 2: 0.3 * (0.7 + 0.4)/2 = 0.165
  // total: 0.585
  std::vector<PRPoint> pts{{0.05, 0.5, 0.7}, {0.02, 0.2, 0.9}, {0.10, 0.8, 0.4}};
  PRCurve c = make_pr_curve(pts);
  CHECK(c.auc == doctest::Approx(0.585).epsilon(1e-12));
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].recall == 0.2);  // re-sorted by recall
  CHECK(c.points[2].recall == 0.8);

  PRCurve single = make_pr_curve({{0.05, 0.6, 0.5}});
  CHECK(single.auc == doctest::Approx(0.3).epsilon(1e-12));

  CHECK_THROWS_AS(make_pr_curve({}), ValidationError);
}

TEST_CASE("duplicate recalls contribute a zero width segment") {
  std::vector<PRPoint> pts{{0.02, 0.5, 0.8}, {0.05, 0.5, 0.6}};
  PRCurve c = make_pr_curve(pts);
  // sorted puts (0.5, 0.6) first; anchor 0.5*0.6 = 0.3, zero-width trapezoid
  CHECK(c.auc == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("pr_sweep averages per phi across trials in task order") {
  std::vector<double> phis{0.1, 0.2};
  std::vector<uint64_t> seeds{10, 20, 30};
  auto runner = [](double phi, uint64_t seed) {
    MetricRecord m;
    m.recall = phi + double(seed) * 1e-3;
    m.precision = 1.0 - phi - double(seed) * 1e-3;
    return m;
  };
  SweepResult res = pr_sweep_detailed(runner, phis, seeds, 2);
  REQUIRE(res.cells.size() == 6);
  CHECK(res.cells[0].phi == 0.1);
  CHECK(res.cells[0].trial == 0);
  CHECK(res.cells[1].trial == 1);
  CHECK(res.cells[3].phi == 0.2);
  CHECK(res.cells[0].record.recall == doctest::Approx(0.11));

  REQUIRE(res.curve.points.size() == 2);
  CHECK(res.curve.points[0].recall == doctest::Approx(0.1 + 0.02));
  CHECK(res.curve.points[0].precision == doctest::Approx(1.0 - 0.1 - 0.02));
  CHECK(res.curve.points[1].recall == doctest::Approx(0.2 + 0.02));

  PRCurve same = pr_sweep(runner, phis, seeds, 1);
  CHECK(same.auc == res.curve.auc);
}

TEST_CASE("a failing task aborts the sweep naming phi and trial") {
  std::vector<double> phis{0.1, 0.2};
  std::vector<uint64_t> seeds{1, 2};
  auto runner = [](double phi, uint64_t seed) -> MetricRecord {
    if (phi > 0.15 && seed == 2) {
      throw NumericalError("synthetic failure");
    }
    return {};
  };
  CHECK_THROWS_WITH_AS(pr_sweep(runner, phis, seeds, 2),
                       doctest::Contains("phi=0.2"), NumericalError);
  try {
    pr_sweep(runner, phis, seeds, 2);
  } catch (const NumericalError& e) {
    std::string what = e.what();
    CHECK(what.find("trial=1") != std::string::npos);
    CHECK(what.find("synthetic failure") != std::string::npos);
  }

  CHECK_THROWS_AS(pr_sweep(runner, {}, seeds), ValidationError);
  CHECK_THROWS_AS(pr_sweep(runner, phis, {}), ValidationError);
}

TEST_CASE("sweep results do not depend on the worker count") {
  std::vector<double> phis{0.1, 0.2, 0.3};
  std::vector<uint64_t> seeds{5, 6, 7, 8};
  auto runner = [](double phi, uint64_t seed) {
    MetricRecord m;
    m.recall = std::sin(phi * double(seed));
    m.precision = std::cos(phi) * 0.5 + 0.5;
    return m;
  };
  SweepResult a = pr_sweep_detailed(runner, phis, seeds, 1);
  SweepResult b = pr_sweep_detailed(runner, phis, seeds, 4);
  CHECK(a.curve.auc == b.curve.auc);
  REQUIRE(a.cells.size() == b.cells.size());
  for (size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].record.recall == b.cells[i].record.recall);
  }
}
