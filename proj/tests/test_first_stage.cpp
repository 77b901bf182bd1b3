#include <doctest.h>

#include <cmath>
#include <numeric>

#include "trimdr/first_stage.hpp"

using namespace trimdr;

namespace {

Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

Matrix normal_matrix(RngStream& rng, int n, int p) {
  Matrix m(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("intercept-only logit") {
  const Matrix one = Matrix::Ones(4, 1);
  Vector d(4);
  d << 0, 1, 0, 1;
  CHECK(std::abs(fit_logistic(one, d).coef(0)) < 1e-12);
  d << 1, 1, 0, 1;
  const LogisticFit fit = fit_logistic(one, d);
  CHECK(fit.coef(0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.grad_norm <= 1e-10);
  CHECK(std::abs(fit.phi.col(0).mean()) < 1e-12);
}

TEST_CASE("logit estimates and influence variance on a large sample") {
  RngStream rng(9, 0);
  const int n = 100000;
  const Matrix X = normal_matrix(rng, n, 2);
  Vector truth(2);
  truth << 0.3, -0.5;
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = rng.uniform() < logistic(X.row(i).dot(truth)) ? 1.0 : 0.0;
  const LogisticFit fit = fit_logistic(X, d);

  Matrix info = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const double w = fit.fitted(i) * (1.0 - fit.fitted(i));
    info += w * X.row(i).transpose() * X.row(i);
  }
  const Matrix cov = info.inverse();
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(cov(j, j));
    CHECK(std::abs(fit.coef(j) - truth(j)) < 3.0 * se);
    const double phi_var = fit.phi.col(j).squaredNorm() / n / n;
    CHECK(std::abs(phi_var / (se * se) - 1.0) < 0.10);
    CHECK(std::abs(fit.phi.col(j).mean()) < 1e-8);
  }
}

TEST_CASE("influence SEs equal the sandwich formula") {
  RngStream rng(10, 0);
  const int n = 400;
  const Matrix X = with_intercept(normal_matrix(rng, n, 2));
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = rng.uniform() < logistic(0.4 * X(i, 1) - 0.2 * X(i, 2)) ? 1.0 : 0.0;
  const LogisticFit fit = fit_logistic(X, d);
  Matrix H = Matrix::Zero(3, 3), S = Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    const Vector x = X.row(i).transpose();
    H += fit.fitted(i) * (1 - fit.fitted(i)) * x * x.transpose();
    const Vector s = x * (d(i) - fit.fitted(i));
    S += s * s.transpose();
  }
  const Matrix sandwich = H.inverse() * S * H.inverse();
  for (int j = 0; j < 3; ++j) {
    const double phi_se = std::sqrt(fit.phi.col(j).squaredNorm() / n) / std::sqrt(static_cast<double>(n));
    CHECK(phi_se == doctest::Approx(std::sqrt(sandwich(j, j))).epsilon(1e-6));
  }

  Vector y(n), mask(n);
  for (int i = 0; i < n; ++i) {
    mask(i) = 1.0 - d(i);
    y(i) = X.row(i).sum() + rng.normal() * (1.0 + std::abs(X(i, 1)));
  }
  const OlsFit ols = fit_ols_subsample(X, y, mask);
  Matrix XtX = Matrix::Zero(3, 3), meat = Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    if (mask(i) == 0.0) continue;
    const Vector x = X.row(i).transpose();
    XtX += x * x.transpose();
    const double e = y(i) - x.dot(ols.coef);
    meat += e * e * x * x.transpose();
  }
  const Matrix hc0 = XtX.inverse() * meat * XtX.inverse();
  for (int j = 0; j < 3; ++j) {
    const double phi_se = std::sqrt(ols.phi.col(j).squaredNorm() / n) / std::sqrt(static_cast<double>(n));
    CHECK(phi_se == doctest::Approx(std::sqrt(hc0(j, j))).epsilon(1e-6));
    CHECK(std::abs(ols.phi.col(j).mean()) < 1e-8);
  }
}

TEST_CASE("permuting observations permutes influence rows") {
  RngStream rng(11, 0);
  const int n = 200;
  const Matrix X = with_intercept(normal_matrix(rng, n, 2));
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = rng.uniform() < logistic(X(i, 1)) ? 1.0 : 0.0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng.uniform() * (i + 1))]);
  Matrix Xp(n, 3);
  Vector dp(n);
  for (int i = 0; i < n; ++i) {
    Xp.row(i) = X.row(order[i]);
    dp(i) = d(order[i]);
  }
  const LogisticFit a = fit_logistic(X, d);
  const LogisticFit b = fit_logistic(Xp, dp);
  CHECK((a.coef - b.coef).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i < n; ++i) CHECK((b.phi.row(i) - a.phi.row(order[i])).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("separated classes") {
  Matrix X(6, 2);
  X << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
  Vector d(6);
  d << 0, 0, 0, 1, 1, 1;
  try {
    fit_logistic(X, d);
    FAIL("expected Separation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Separation);
  }
}

TEST_CASE("OLS on a subsample") {
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  Vector y = 2.0 * X.col(0);
  Vector mask = Vector::Ones(4);
  const OlsFit exact = fit_ols_subsample(X, y, mask);
  CHECK(exact.coef(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(exact.phi.cwiseAbs().maxCoeff() < 1e-14);

  const OlsFit mean = fit_ols_subsample(Matrix::Ones(3, 1), Vector::LinSpaced(3, 1, 3), Vector::Ones(3));
  CHECK(mean.coef(0) == doctest::Approx(2.0).epsilon(1e-14));

  RngStream rng(12, 0);
  const Matrix Z = with_intercept(normal_matrix(rng, 50, 2));
  Vector yy(50), m(50);
  for (int i = 0; i < 50; ++i) {
    yy(i) = rng.normal();
    m(i) = i % 3 == 0 ? 0.0 : 1.0;
  }
  const OlsFit base = fit_ols_subsample(Z, yy, m);
  for (int i = 0; i < 50; ++i)
    if (m(i) == 0.0) yy(i) = i % 2 ? std::nan("") : 1e300;
  const OlsFit altered = fit_ols_subsample(Z, yy, m);
  CHECK((base.coef - altered.coef).norm() == 0.0);
  CHECK((base.phi - altered.phi).norm() == 0.0);
  for (int i = 0; i < 50; ++i)
    if (m(i) == 0.0) CHECK(base.phi.row(i).norm() == 0.0);
}

TEST_CASE("rank-deficient subsample design") {
  Matrix X(4, 2);
  X << 1, 1, 1, 1, 1, 2, 1, 3;
  Vector mask(4);
  mask << 1, 1, 0, 0;
  try {
    fit_ols_subsample(X, Vector::Ones(4), mask);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("OLS interval coverage from the influence rows") {
  const int reps = 2000;
  const int n = 1000;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(13, r);
    const Matrix X = with_intercept(normal_matrix(rng, n, 4));
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = X.row(i).sum() + rng.normal();
    const OlsFit fit = fit_ols_subsample(X, y, Vector::Ones(n));
    const double se = std::sqrt(fit.phi.col(1).squaredNorm() / n / n);
    if (std::abs(fit.coef(1) - 1.0) <= 1.96 * se) ++covered;
  }
  const double coverage = static_cast<double>(covered) / reps;
  CHECK(coverage >= 0.94);
  CHECK(coverage <= 0.96);
}

TEST_CASE("stacked first stage blocks") {
  FirstStageFit fs;
  fs.append("a", Vector::Constant(2, 1.0), Matrix::Zero(5, 2));
  fs.append("b", Vector::Constant(3, 2.0), Matrix::Ones(5, 3));
  CHECK(fs.gamma.size() == 5);
  CHECK(fs.block("b").offset == 2);
  CHECK(fs.segment(fs.gamma, "b").sum() == 6.0);
  CHECK_THROWS_AS(fs.block("c"), Error);
}
