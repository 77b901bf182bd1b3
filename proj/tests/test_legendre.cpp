#include <doctest.h>

#include <cmath>

#include "trimdr/legendre.hpp"

using namespace trimdr;

TEST_CASE("closed-form values at 0, 1/2 and 1") {
  const LegendreBasis basis(3);
  const Vector at0 = basis.eval(0.0);
  const Vector at1 = basis.eval(1.0);
  const Vector mid = basis.eval(0.5);
  for (int j = 0; j <= 3; ++j) {
    const double s = std::sqrt(2.0 * j + 1.0);
    CHECK(at0(j) == doctest::Approx((j % 2 ? -1.0 : 1.0) * s).epsilon(1e-15));
    CHECK(at1(j) == doctest::Approx(s).epsilon(1e-15));
  }
  CHECK(mid(0) == 1.0);
  CHECK(std::abs(mid(1)) < 1e-15);
  CHECK(mid(2) == doctest::Approx(-0.5 * std::sqrt(5.0)).epsilon(1e-15));
  CHECK(std::abs(mid(3)) < 1e-15);
}

TEST_CASE("analytic derivatives at zero") {
  const LegendreBasis basis(3);
  const Vector d1 = basis.eval_deriv(0.0, 1);
  CHECK(d1(0) == 0.0);
  CHECK(d1(1) == doctest::Approx(2.0 * std::sqrt(3.0)));
  CHECK(d1(2) == doctest::Approx(-6.0 * std::sqrt(5.0)));
  CHECK(d1(3) == doctest::Approx(12.0 * std::sqrt(7.0)));
  CHECK(basis.eval_deriv(0.0, 2)(2) == doctest::Approx(12.0 * std::sqrt(5.0)));
  CHECK((basis.eval_deriv(0.37, 0) - basis.eval(0.37)).norm() == 0.0);
  CHECK(basis.eval_deriv(0.2, 4).isZero(0.0));
  CHECK_THROWS_AS(basis.eval_deriv(0.2, -1), Error);
}

TEST_CASE("degree five matches the expanded polynomial") {
  const LegendreBasis basis(5);
  for (double a : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const double p5 = std::sqrt(11.0) *
                      (252 * std::pow(a, 5) - 630 * std::pow(a, 4) + 560 * std::pow(a, 3) - 210 * a * a + 30 * a - 1);
    CHECK(basis.eval(a)(5) == doctest::Approx(p5).epsilon(1e-12));
  }
}

namespace {

Matrix trapezoid_gram(const LegendreBasis& basis, int m) {
  Matrix gram = Matrix::Zero(basis.size(), basis.size());
  for (int i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) / (m - 1);
    const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
    const Vector p = basis.eval(a);
    gram += w * p * p.transpose();
  }
  return gram / (m - 1);
}

}  // namespace

TEST_CASE("orthonormal Gram matrix up to degree ten") {
  for (int K = 0; K <= 10; ++K) {
    const LegendreBasis basis(K);
    const Matrix coarse = trapezoid_gram(basis, 2049);
    const Matrix fine = trapezoid_gram(basis, 4097);
    const Matrix gram = (4.0 * fine - coarse) / 3.0;
    CHECK((gram - Matrix::Identity(K + 1, K + 1)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("first derivative agrees with finite differences") {
  const LegendreBasis basis(6);
  RngStream rng(5, 0);
  for (int i = 0; i < 20; ++i) {
    const double a = 0.05 + 0.9 * rng.uniform();
    const double step = 1e-5;
    const Vector fd = (basis.eval(a + step) - basis.eval(a - step)) / (2 * step);
    CHECK((fd - basis.eval_deriv(a, 1)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("projection reproduces polynomials of degree at most K") {
  const LegendreBasis basis(4);
  Vector a(40);
  for (int i = 0; i < 40; ++i) a(i) = (i + 0.5) / 40.0;
  const Matrix P = basis.design(a);
  const Vector y = (1.0 - 2.0 * a.array() + 3.0 * a.array().pow(4)).matrix();
  const Vector coef = (P.transpose() * P).ldlt().solve(P.transpose() * y);
  CHECK((P * coef - y).cwiseAbs().maxCoeff() < 1e-10);
}
