#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

#include <Eigen/Dense>

#include "trimdr/error.hpp"

namespace trimdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kMaxCondition = 1e12;

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

// Sample mean with a fixed left-to-right summation order.
double sample_mean(const Vector& v);
// Column means of a matrix, same summation order as sample_mean.
Vector column_means(const Matrix& m);
// Population (1/n) standard deviation.
double sample_sd(const Vector& v);

struct SpdSolution {
  Vector x;
  double condition = 1.0;  // 1-norm condition estimate
};

// Solves Gx = b for symmetric G through an LDLT factorization. Throws
// IllConditioned above kMaxCondition.
SpdSolution solve_spd(const Matrix& G, const Vector& b);
// Same factorization applied to several right-hand sides.
Matrix solve_spd(const Matrix& G, const Matrix& B, double* condition = nullptr);

// Composite trapezoid rule on npoints equispaced nodes.
double trapezoid(const std::function<double(double)>& f, double a, double b, int npoints);

// Jacobian of f at x, step step_scale * (1 + |x_j|) in coordinate j.
Matrix central_fd(const std::function<Vector(const Vector&)>& f, const Vector& x,
                  double step_scale = 1e-6);

enum class KernelType { Gaussian, Epanechnikov };

struct Kernel {
  KernelType type = KernelType::Gaussian;

  double operator()(double u) const;
  // Half-width of the support; infinite for the Gaussian.
  double support_radius() const;
  std::string_view name() const;
};

Kernel parse_kernel(std::string_view name);

// Silverman's rule of thumb, 1.06 * sd * n^{-1/5}.
double silverman_bandwidth(const Vector& values);

// Reproducible random stream identified by (seed, stream). Distinct stream
// indices seed independent engines.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  double normal();
  double uniform();
  double chi_square(int df);
  // Standard normal over sqrt(chi-square(df)/df); the normal is drawn first.
  double student_t(int df);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

Vector draw_student_t(RngStream& rng, int df, int n);

}  // namespace trimdr
