#include "trimdr/numkit.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace trimdr {

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

double sample_mean(const Vector& v) {
  require(v.size() > 0, "sample_mean of an empty vector");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += v[i];
  return sum / static_cast<double>(v.size());
}

Vector column_means(const Matrix& m) {
  require(m.rows() > 0, "column_means of an empty matrix");
  Vector out = Vector::Zero(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out += m.row(i).transpose();
  return out / static_cast<double>(m.rows());
}

double sample_sd(const Vector& v) {
  const double mean = sample_mean(v);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) ss += (v[i] - mean) * (v[i] - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

namespace {

Eigen::LDLT<Matrix> factor_spd(const Matrix& G, double& condition) {
  require(G.rows() == G.cols(), "solve_spd: matrix is not square");
  if (!all_finite(G)) fail(ErrorKind::NonFinite, "solve_spd: matrix has non-finite entries");
  const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  require((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "solve_spd: matrix is not symmetric");

  Eigen::LDLT<Matrix> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !(ldlt.vectorD().minCoeff() > std::numeric_limits<double>::epsilon() * ldlt.vectorD().maxCoeff())) {
    fail(ErrorKind::IllConditioned, "solve_spd: matrix is not positive definite");
  }
  const double rcond = ldlt.rcond();
  condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    fail(ErrorKind::IllConditioned,
         "solve_spd: condition estimate " + std::to_string(condition) + " exceeds 1e12");
  }
  return ldlt;
}

}  // namespace

SpdSolution solve_spd(const Matrix& G, const Vector& b) {
  require(G.rows() == b.size(), "solve_spd: dimension mismatch");
  if (!all_finite(b)) fail(ErrorKind::NonFinite, "solve_spd: right-hand side has non-finite entries");
  SpdSolution out;
  const auto ldlt = factor_spd(G, out.condition);
  out.x = ldlt.solve(b);
  // One round of iterative refinement.
  const Vector r = b - G * out.x;
  out.x += ldlt.solve(r);
  return out;
}

Matrix solve_spd(const Matrix& G, const Matrix& B, double* condition) {
  require(G.rows() == B.rows(), "solve_spd: dimension mismatch");
  if (!all_finite(B)) fail(ErrorKind::NonFinite, "solve_spd: right-hand side has non-finite entries");
  double cond = 1.0;
  const auto ldlt = factor_spd(G, cond);
  if (condition != nullptr) *condition = cond;
  Matrix x = ldlt.solve(B);
  const Matrix r = B - G * x;
  x += ldlt.solve(r);
  return x;
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int npoints) {
  require(a <= b, "trapezoid: a > b");
  require(npoints >= 2, "trapezoid: npoints < 2");
  const double step = (b - a) / (npoints - 1);
  double sum = 0.0;
  for (int i = 0; i < npoints; ++i) {
    const double x = (i == npoints - 1) ? b : a + i * step;
    const double fx = f(x);
    if (std::isnan(fx)) fail(ErrorKind::NonFinite, "trapezoid: integrand is NaN at " + std::to_string(x));
    sum += (i == 0 || i == npoints - 1) ? 0.5 * fx : fx;
  }
  return sum * step;
}

Matrix central_fd(const std::function<Vector(const Vector&)>& f, const Vector& x,
                  double step_scale) {
  Matrix jac;
  Vector xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = step_scale * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + step;
    const Vector up = f(xp);
    xp[j] = x[j] - step;
    const Vector down = f(xp);
    xp[j] = x[j];
    if (jac.size() == 0) jac.resize(up.size(), x.size());
    jac.col(j) = (up - down) / (2.0 * step);
  }
  return jac;
}

double Kernel::operator()(double u) const {
  switch (type) {
    case KernelType::Gaussian:
      return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    case KernelType::Epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

double Kernel::support_radius() const {
  return type == KernelType::Epanechnikov ? 1.0 : std::numeric_limits<double>::infinity();
}

std::string_view Kernel::name() const {
  return type == KernelType::Epanechnikov ? "epanechnikov" : "gaussian";
}

Kernel parse_kernel(std::string_view name) {
  if (name == "gaussian") return Kernel{KernelType::Gaussian};
  if (name == "epanechnikov") return Kernel{KernelType::Epanechnikov};
  fail(ErrorKind::ConfigError, "unknown kernel '" + std::string(name) + "'");
}

double silverman_bandwidth(const Vector& values) {
  require(values.size() > 1, "silverman_bandwidth: need at least two values");
  return 1.06 * sample_sd(values) * std::pow(static_cast<double>(values.size()), -0.2);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ splitmix64(stream);
  std::seed_seq seq{
      static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
      static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::chi_square(int df) {
  require(df >= 1, "chi_square: df < 1");
  std::chi_squared_distribution<double> dist(static_cast<double>(df));
  return dist(engine_);
}

double RngStream::student_t(int df) {
  const double z = normal();
  const double v = chi_square(df);
  return z / std::sqrt(v / df);
}

Vector draw_student_t(RngStream& rng, int df, int n) {
  require(df >= 1, "draw_student_t: df < 1");
  require(n >= 0, "draw_student_t: negative n");
  Vector out(n);
  for (int i = 0; i < n; ++i) out[i] = rng.student_t(df);
  return out;
}

}  // namespace trimdr
