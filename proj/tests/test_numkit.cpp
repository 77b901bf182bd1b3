#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trimdr/numkit.hpp"

using namespace trimdr;

TEST_CASE("solve_spd handles identity and diagonal systems") {
  Vector b(3);
  b << 1, 2, 3;
  const SpdSolution s = solve_spd(Matrix::Identity(3, 3), b);
  CHECK((s.x - b).norm() < 1e-14);
  CHECK(s.condition == doctest::Approx(1.0));

  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = 2;
  g(1, 1) = 4;
  Vector b2(2);
  b2 << 2, 4;
  const SpdSolution d = solve_spd(g, b2);
  CHECK(d.x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.x(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_spd recovers a known solution on random SPD systems") {
  RngStream rng(7, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) m(i, j) = rng.normal();
    const Matrix g = m * m.transpose() + 0.5 * Matrix::Identity(5, 5);
    Vector x(5);
    for (int i = 0; i < 5; ++i) x(i) = rng.normal();
    const Vector b = g * x;
    const SpdSolution s = solve_spd(g, b);
    CHECK((s.x - x).norm() < 1e-8 * (1.0 + x.norm()));
    CHECK((g * s.x - b).norm() <= 1e-8 * b.norm());
  }
}

TEST_CASE("solve_spd rejects bad inputs") {
  Matrix g = Matrix::Identity(2, 2);
  g(1, 1) = 1e-14;
  Vector b = Vector::Ones(2);
  try {
    solve_spd(g, b);
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }

  Matrix h = Matrix::Identity(2, 2);
  h(0, 1) = std::nan("");
  try {
    solve_spd(h, b);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
  }
}

TEST_CASE("trapezoid on simple integrands") {
  CHECK(trapezoid([](double) { return 1.0; }, 0, 1, 100) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(trapezoid([](double x) { return x; }, 0, 1, 100) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(trapezoid([](double x) { return x * x; }, 0, 1, 1025) - 1.0 / 3.0) < 1e-6);
}

TEST_CASE("trapezoid error shrinks fourfold when the grid doubles") {
  auto cube = [](double x) { return x * x * x; };
  double prev = std::abs(trapezoid(cube, 0, 1, 17) - 0.25);
  for (int intervals = 32; intervals <= 512; intervals *= 2) {
    const double err = std::abs(trapezoid(cube, 0, 1, intervals + 1) - 0.25);
    CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
    prev = err;
  }
}

TEST_CASE("trapezoid reports NaN integrands") {
  CHECK_THROWS_AS(trapezoid([](double x) { return x > 0.5 ? std::nan("") : x; }, 0, 1, 11), Error);
}

TEST_CASE("central_fd Jacobians") {
  Vector x(3);
  x << 0.3, -2.0, 5.0;
  const Matrix id = central_fd([](const Vector& v) { return v; }, x);
  CHECK((id - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);

  Vector y(2);
  y << 1.0, 2.0;
  const Matrix j = central_fd(
      [](const Vector& v) {
        Vector out(2);
        out << v(0) * v(0), v(0) * v(1);
        return out;
      },
      y);
  Matrix expected(2, 2);
  expected << 2, 0, 2, 1;
  CHECK((j - expected).cwiseAbs().maxCoeff() < 1e-5);

  const Matrix z = central_fd([](const Vector&) { return Vector::Constant(2, 4.0); }, y);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernels integrate to one") {
  const Kernel gauss{KernelType::Gaussian};
  const Kernel epan{KernelType::Epanechnikov};
  CHECK(std::abs(trapezoid(gauss, -10, 10, 20001) - 1.0) < 1e-8);
  CHECK(std::abs(trapezoid(epan, -1, 1, 20001) - 1.0) < 1e-8);
  CHECK(epan(1.5) == 0.0);
  CHECK(gauss(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
  CHECK(parse_kernel("epanechnikov").type == KernelType::Epanechnikov);
  CHECK_THROWS_AS(parse_kernel("box"), Error);
}

TEST_CASE("Silverman bandwidth") {
  Vector v(4);
  v << 1, 2, 3, 4;
  CHECK(silverman_bandwidth(v) == doctest::Approx(1.06 * std::sqrt(1.25) * std::pow(4.0, -0.2)));
}

TEST_CASE("Student t draws match the first two moments") {
  RngStream rng(2024, 3);
  const int n = 1000000;
  const Vector t = draw_student_t(rng, 30, n);
  const double var = 30.0 / 28.0;
  CHECK(std::abs(sample_mean(t)) < 4.0 * std::sqrt(var / n));
  CHECK(std::abs(sample_sd(t) * sample_sd(t) / var - 1.0) < 0.02);
}

TEST_CASE("streams are reproducible and mutually uncorrelated") {
  RngStream a(11, 0), b(11, 0), c(11, 1);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  const int n = 100000;
  RngStream s0(11, 5), s1(11, 6);
  Vector u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u(i) = s0.normal();
    v(i) = s1.normal();
  }
  const double rho = ((u.array() - u.mean()) * (v.array() - v.mean())).mean() / (sample_sd(u) * sample_sd(v));
  CHECK(std::abs(rho) < 0.01);
}
