#include <doctest.h>

#include <cmath>

#include "trimdr/simulation.hpp"

using namespace trimdr;

TEST_CASE("analytic standardization constants at df = 30") {
  const auto c = standardization_constants(30);
  CHECK(c[0] * c[0] == doctest::Approx(30.0 / 28.0).epsilon(1e-14));
  CHECK(c[1] * c[1] == doctest::Approx(2.0 * (2700.0 / 728.0 - (15.0 / 14.0) * (15.0 / 14.0))).epsilon(1e-14));
  CHECK(c[1] * c[1] == doctest::Approx(5.1218).epsilon(1e-4));
  CHECK(c[2] * c[2] == doctest::Approx(405000.0 / 17472.0).epsilon(1e-14));
  CHECK(c[3] == c[2]);
  CHECK_THROWS_AS(standardization_constants(6), Error);
}

TEST_CASE("analytic constants agree with empirical moments") {
  const int n = 10000000;
  RngStream rng(31, 0);
  double s1 = 0, s2 = 0, s3 = 0;
  for (int i = 0; i < n; ++i) {
    const double a = rng.student_t(30), b = rng.student_t(30);
    s1 += a * a;
    s2 += (a * a - b * b) * (a * a - b * b);
    s3 += a * a * a * a * a * a;
  }
  const auto c = standardization_constants(30);
  CHECK(std::abs(s1 / n / (c[0] * c[0]) - 1.0) < 0.01);
  CHECK(std::abs(s2 / n / (c[1] * c[1]) - 1.0) < 0.01);
  CHECK(std::abs(s3 / n / (c[2] * c[2]) - 1.0) < 0.01);
}

TEST_CASE("standardized covariates on a large draw") {
  const int n = 1000000;
  RngStream rng(32, 0);
  const DidSample s = generate(make_dgp(1, 30, n), rng);
  for (int j = 1; j <= 4; ++j) {
    const Vector z = s.x.col(j);
    CHECK(std::abs(sample_mean(z)) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sample_sd(z) * sample_sd(z) - 1.0) < 0.05);
  }
}

TEST_CASE("treated share matches the integrated propensity") {
  const DgpConfig cfg = make_dgp(1, 30, 1000000);
  RngStream rng(33, 0);
  const DidSample s = generate(cfg, rng);

  RngStream pop(33, 1);
  const int m = 10000000;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double x[4];
    for (double& v : x) v = pop.student_t(30);
    const double f = x[0] / cfg.scale[0] + (x[0] * x[0] - x[1] * x[1]) / cfg.scale[1] +
                     x[2] * x[2] * x[2] / cfg.scale[2] + x[3] * x[3] * x[3] / cfg.scale[3];
    total += logistic(f);
  }
  CHECK(std::abs(sample_mean(s.d) - total / m) < 0.01);
}

TEST_CASE("potential outcomes differ only by noise") {
  for (int dgp = 1; dgp <= 3; ++dgp) {
    RngStream rng(34, dgp);
    const int n = 100000;
    const GeneratedSample g = generate_detailed(make_dgp(dgp, 10, n), rng);
    const Vector effect = g.y1_treated - g.y1_control;
    CHECK(std::abs(sample_mean(effect)) < 4.0 * std::sqrt(2.0 / n));
    for (int i = 0; i < 100; ++i) {
      CHECK(g.sample.y1(i) == (g.sample.d(i) == 1.0 ? g.y1_treated(i) : g.y1_control(i)));
    }
  }
}

TEST_CASE("generation is reproducible") {
  RngStream a(35, 7), b(35, 7);
  const DidSample s = generate(make_dgp(2, 30, 500), a);
  const DidSample t = generate(make_dgp(2, 30, 500), b);
  CHECK(s.x == t.x);
  CHECK(s.y0 == t.y0);
  CHECK(s.y1 == t.y1);
  CHECK(s.d == t.d);
}

TEST_CASE("design dependence on the raw covariates") {
  RngStream a(36, 0), b(36, 0);
  const GeneratedSample one = generate_detailed(make_dgp(1, 30, 200), a);
  const GeneratedSample two = generate_detailed(make_dgp(2, 30, 200), b);
  CHECK(one.raw == two.raw);
  CHECK(one.sample.x == two.sample.x);
  CHECK_FALSE(one.sample.d == two.sample.d);
}

TEST_CASE("summaries") {
  std::vector<ReplicationRecord> records(5);
  const double thetas[] = {0.1, -0.2, 0.3, 0.05, 0.0};
  for (int r = 0; r < 5; ++r) records[r] = {true, thetas[r], 0.15, 2, ""};
  records[4] = {false, 0.0, 0.0, 0, "Separation"};
  const MethodSummary m = summarize("NEW", TrimConfig{}, records, 0.0);
  CHECK(m.succeeded == 4);
  CHECK(m.failed == 1);
  CHECK(m.failure_kinds.at("Separation") == 1);
  CHECK(m.bias == doctest::Approx(0.0625));
  CHECK(std::abs(m.rmse * m.rmse - m.bias * m.bias - m.sd * m.sd) < 1e-10);
  CHECK(m.coverage == doctest::Approx(0.75));
  CHECK(m.mean_trimmed == 2.0);
}

TEST_CASE("study output does not depend on the worker count") {
  const DgpConfig cfg = make_dgp(2, 30, 300);
  const SimulationReport one = run_study(cfg, 12, default_methods(), 99, 1);
  const SimulationReport three = run_study(cfg, 12, default_methods(), 99, 3);
  for (std::size_t m = 0; m < one.records.size(); ++m) {
    for (int r = 0; r < 12; ++r) {
      CHECK(one.records[m][r].theta == three.records[m][r].theta);
      CHECK(one.records[m][r].se == three.records[m][r].se);
      CHECK(one.records[m][r].error == three.records[m][r].error);
    }
    CHECK(one.methods[m].sd == three.methods[m].sd);
  }
  CHECK_THROWS_AS(run_study(cfg, 0, default_methods(), 1, 1), Error);
}

TEST_CASE("default methods") {
  const auto methods = default_methods();
  REQUIRE(methods.size() == 2);
  CHECK(methods[0].name == "CON");
  CHECK(methods[0].options.trim.h == 0.0);
  CHECK(methods[1].name == "NEW");
  CHECK(methods[1].options.trim.h == 0.01);
  CHECK(methods[1].options.trim.K == 3);
  CHECK(methods[1].options.trim.k == 3);
}
