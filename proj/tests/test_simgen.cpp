// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include <latlapmed/simgen.hpp>

using namespace latlapmed;

TEST_CASE("rng streams are deterministic and substreams are independent") {
  Rng a(123), b(123);
  for (int t = 0; t < 1000; ++t) {
    double ua = a.uniform();
    CHECK(ua == b.uniform());
    CHECK(ua >= 0.0);
    CHECK(ua < 1.0);
  }
  Rng s1 = substream(7, "sim:latent");
  Rng s2 = substream(7, "sim:scale");
  Rng s3 = substream(8, "sim:latent");
  double v1 = s1.uniform(), v2 = s2.uniform(), v3 = s3.uniform();
  CHECK(v1 != v2);
  CHECK(v1 != v3);

  Rng c(5);
  for (int t = 0; t < 1000; ++t) {
    uint64_t v = c.below(17);
    CHECK(v < 17);
  }
}

TEST_CASE("rng moments land where the distributions say") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int t = 0; t < n; ++t) {
    double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.03));

  double csum = 0, csum2 = 0;
  for (int t = 0; t < n; ++t) {
    double c = rng.chi_square(30.0);
    csum += c;
    csum2 += c * c;
  }
  double cmean = csum / n;
  CHECK(cmean == doctest::Approx(30.0).epsilon(0.03));
  CHECK(csum2 / n - cmean * cmean == doctest::Approx(60.0).epsilon(0.1));

  double small = 0;
  for (int t = 0; t < n; ++t) small += rng.chi_square(7.0);
  CHECK(small / n == doctest::Approx(7.0).epsilon(0.03));

  CHECK_THROWS_AS(rng.chi_square(1.0), ValidationError);
}

TEST_CASE("random_scale_matrix is symmetric positive definite with the ridge floor") {
  Rng rng(11);
  for (Index p : {2, 3, 6}) {
    Matrix sigma = random_scale_matrix(p, rng);
    CHECK(sigma == sigma.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    CHECK(es.eigenvalues().minCoeff() >= 0.1 - 1e-12);
  }
}

TEST_CASE("latent t samples reproduce the scaled covariance") {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 0.5;
  double df = 30.0;
  Rng rng(99);
  Index n = 100000;
  Matrix X = sample_latent_t(n, sigma, df, rng);
  Matrix emp = (X.transpose() * X) / double(n);
  Matrix want = sigma * (df / (df - 2.0));
  CHECK((emp - want).norm() <= 0.1 * want.norm());

  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(sample_latent_t(10, bad, df, rng), NumericalError);
  Matrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(sample_latent_t(10, rect, df, rng), ValidationError);
  CHECK_THROWS_AS(sample_latent_t(10, sigma, 2.0, rng), ValidationError);
}

TEST_CASE("score_points takes the best mean contrast over components") {
  Matrix X(2, 4);
  X << 1.0, 2.0, 3.0, 4.0,
       8.0, 0.0, 0.0, 0.0;
  std::vector<std::vector<Index>> comps{{0}, {1, 2}};
  Vector s = score_points(X, comps);
  // row 0: {0} gives 1 - 3 = -2; {1,2} gives 2.5 - 2.5 = 0
  CHECK(s[0] == doctest::Approx(0.0));
  // row 1: {0} gives 8 - 0 = 8; {1,2} gives 0 - 4 = -4
  CHECK(s[1] == doctest::Approx(8.0));

  CHECK_THROWS_AS(score_points(X, {}), ValidationError);
  CHECK_THROWS_AS(score_points(X, {{0, 1, 2, 3}}), ValidationError);
  CHECK_THROWS_AS(score_points(X, {{4}}), ValidationError);
  CHECK_THROWS_AS(score_points(X, {std::vector<Index>{}}), ValidationError);
}

TEST_CASE("generated datasets have the planted counts at the reference size") {
  SimConfig cfg;
  cfg.n = 7000;
  cfg.p = 3;
  cfg.seed = 4;
  Dataset d = generate(cfg);
  REQUIRE(d.n() == 7000);
  REQUIRE(d.p() == 3);
  CHECK((d.features.array() >= 0.0).all());  // folded

  Index n_anom = 0, n_high = 0, pos = 0, neg = 0;
  for (Index i = 0; i < d.n(); ++i) {
    if ((*d.truth_anomaly)[size_t(i)]) ++n_anom;
    if ((*d.truth_utility)[size_t(i)] == 1) ++n_high;
    if (d.labels[size_t(i)] == 1) ++pos;
    if (d.labels[size_t(i)] == -1) ++neg;
  }
  CHECK(n_anom == 350);  // ceil(0.05 * 7000)
  CHECK(n_high == 88);   // ceil(0.25 * 350)
  CHECK(pos == 26);      // round(0.3 * 88)
  CHECK(neg == 26);      // mirrored count of low-utility labels

  for (Index i = 0; i < d.n(); ++i) {
    int8_t lab = d.labels[size_t(i)];
    if (lab != 0) {
      CHECK((*d.truth_anomaly)[size_t(i)] == 1);
      CHECK((*d.truth_utility)[size_t(i)] == lab);
    }
    if ((*d.truth_utility)[size_t(i)] == 1) {
      CHECK((*d.truth_anomaly)[size_t(i)] == 1);  // high utility implies anomalous
    }
  }
}

TEST_CASE("generation is bit for bit reproducible and seed sensitive") {
  SimConfig cfg;
  cfg.n = 500;
  cfg.p = 3;
  cfg.seed = 21;
  Dataset a = generate(cfg);
  Dataset b = generate(cfg);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(*a.truth_anomaly == *b.truth_anomaly);
  CHECK(*a.truth_utility == *b.truth_utility);

  cfg.seed = 22;
  Dataset c = generate(cfg);
  CHECK(a.features != c.features);
}

TEST_CASE("generator rejects configurations that cannot plant labels") {
  SimConfig cfg;
  cfg.n = 10;
  cfg.p = 3;
  cfg.phi_true = 0.1;  // 1 anomaly, 1 high utility, reveal rounds to 0
  cfg.seed = 1;
  CHECK_THROWS_AS(generate(cfg), ValidationError);

  cfg.n = 200;
  cfg.top_utility_frac = 1.0;  // no low-utility anomalies to mirror
  CHECK_THROWS_AS(generate(cfg), ValidationError);

  SimConfig bad;
  bad.df = 2.0;
  CHECK_THROWS_AS(generate(bad), ValidationError);
  bad = SimConfig{};
  bad.phi_true = 0.0;
  CHECK_THROWS_AS(generate(bad), ValidationError);
  bad = SimConfig{};
  bad.p = 1;
  CHECK_THROWS_AS(generate(bad), ValidationError);
  bad = SimConfig{};
  bad.comp_size_min = 5;
  bad.comp_size_max = 2;
  CHECK_THROWS_AS(generate(bad), ValidationError);
}
