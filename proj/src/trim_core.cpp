#include "trimdr/trim_core.hpp"

#include <cmath>
#include <sstream>

namespace trimdr {

void TrimConfig::validate() const {
  if (!(h >= 0.0 && h < 1.0)) fail(ErrorKind::ConfigError, "trimming threshold h must lie in [0, 1)");
  if (k < 1) fail(ErrorKind::ConfigError, "correction order k must be at least 1");
  if (K < k) fail(ErrorKind::ConfigError, "sieve degree K must be at least k");
  if (k > kMaxCorrectionOrder) fail(ErrorKind::ConfigError, "correction order k must not exceed 12");
}

double factorial(int n) {
  require(n >= 0 && n <= kMaxCorrectionOrder, "factorial: argument outside [0, 12]");
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return static_cast<double>(f);
}

AlphaResult alpha_hat(const MomentValues& values, bool trivial_denominator, const TrimConfig& cfg) {
  const Vector& A = values.A;
  const Vector& B = values.B;
  const auto n = B.size();
  require(n > 0, "alpha_hat: empty sample");

  AlphaResult res;
  res.values = values;
  res.trivial = trivial_denominator;
  if (trivial_denominator) {
    res.value = res.untrimmed_part = sample_mean(B);
    return res;
  }

  require(A.size() == n, "alpha_hat: A and B differ in length");
  cfg.validate();
  res.h = cfg.h;
  res.k = cfg.k;

  const double inv_n = 1.0 / static_cast<double>(n);
  double untrimmed = 0.0;
  res.trimmed_moments = Vector::Zero(cfg.k);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(A[i]) >= cfg.h) {
      untrimmed += B[i] / A[i];
    } else {
      ++res.trimmed_count;
      double power = 1.0;
      for (int kappa = 1; kappa <= cfg.k; ++kappa) {
        res.trimmed_moments[kappa - 1] += power;
        power *= A[i];
      }
    }
  }
  if (res.trimmed_count == n) {
    std::ostringstream msg;
    msg << "every observation of component has |A| < h = " << cfg.h;
    fail(ErrorKind::DegenerateTrim, msg.str());
  }
  res.untrimmed_part = untrimmed * inv_n;
  res.trimmed_moments *= inv_n;
  res.m_derivs = Vector::Zero(cfg.k);

  // With nothing trimmed every correction term is multiplied by zero.
  if (res.trimmed_count > 0) {
    res.sieve = fit_sieve(A, B, cfg.K);
    for (int kappa = 1; kappa <= cfg.k; ++kappa) {
      res.m_derivs[kappa - 1] = deriv_at_zero(*res.sieve, kappa);
      res.correction_part +=
          res.trimmed_moments[kappa - 1] / factorial(kappa) * res.m_derivs[kappa - 1];
    }
  }
  res.value = res.untrimmed_part + res.correction_part;
  return res;
}

AlphaResult alpha_hat(const MomentComponent& comp, const Vector& gamma, const TrimConfig& cfg) {
  return alpha_hat(comp.evaluate(gamma), comp.trivial_denominator, cfg);
}

Matrix psi_matrix(const AlphaResult& res) {
  const auto n = res.values.B.size();
  if (!res.sieve) return Matrix::Zero(n, res.k);
  Matrix psi(n, res.k);
  for (int kappa = 1; kappa <= res.k; ++kappa) {
    psi.col(kappa - 1) = psi_influence(*res.sieve, res.values.A, res.values.B, kappa);
  }
  return psi;
}

Vector omega_contributions(const AlphaResult& res, const Matrix& psi, const Vector& dalpha_dgamma,
                           const Matrix& phi) {
  const Vector& A = res.values.A;
  const Vector& B = res.values.B;
  const auto n = B.size();
  if (phi.rows() != n || phi.cols() != dalpha_dgamma.size()) {
    fail(ErrorKind::Precondition, "omega_contributions: phi does not conform to the sample or gradient");
  }

  Vector omega = phi * dalpha_dgamma;
  if (res.trivial) return omega + B;

  if (res.trimmed_count > 0 && (psi.rows() != n || psi.cols() != res.k)) {
    fail(ErrorKind::Precondition, "omega_contributions: psi must be n x k");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(A[i]) >= res.h) {
      omega[i] += B[i] / A[i];
    } else {
      double power = 1.0;
      for (int kappa = 1; kappa <= res.k; ++kappa) {
        omega[i] += power / factorial(kappa) * res.m_derivs[kappa - 1];
        power *= A[i];
      }
    }
  }
  if (res.trimmed_count > 0) {
    for (int kappa = 1; kappa <= res.k; ++kappa) {
      omega += (res.trimmed_moments[kappa - 1] / factorial(kappa)) * psi.col(kappa - 1);
    }
  }
  return omega;
}

Vector omega_contributions(const AlphaResult& res, const Vector& dalpha_dgamma, const Matrix& phi) {
  return omega_contributions(res, psi_matrix(res), dalpha_dgamma, phi);
}

double assemble_theta(const Combination& combination, const Vector& alphas) {
  if (!all_finite(alphas)) fail(ErrorKind::NonFinite, "assemble_theta: non-finite alpha");
  const double theta = combination.value(alphas);
  if (!std::isfinite(theta)) {
    fail(ErrorKind::DomainError, combination.name + ": combination is undefined at these moments");
  }
  return theta;
}

double assemble_theta(const EstimandSpec& spec, const Vector& alphas) {
  require(static_cast<std::size_t>(alphas.size()) == spec.components.size(),
          "assemble_theta: one alpha per component required");
  return assemble_theta(spec.combination, alphas);
}

namespace {

void check_arity(const Vector& a, Eigen::Index n, const std::string& name) {
  require(a.size() == n, name + ": wrong number of moments");
}

}  // namespace

Combination did_combination() {
  Combination c;
  c.name = "did";
  c.value = [](const Vector& a) {
    check_arity(a, 3, "did");
    if (a[2] == 0.0) fail(ErrorKind::DomainError, "did: treated share E_n[D] is zero");
    return (a[0] - a[1]) / a[2];
  };
  c.gradient = [](const Vector& a) {
    check_arity(a, 3, "did");
    if (a[2] == 0.0) fail(ErrorKind::DomainError, "did: treated share E_n[D] is zero");
    Vector g(3);
    g << 1.0 / a[2], -1.0 / a[2], -(a[0] - a[1]) / (a[2] * a[2]);
    return g;
  };
  return c;
}

Combination ate_combination() {
  Combination c;
  c.name = "ate";
  c.value = [](const Vector& a) {
    check_arity(a, 3, "ate");
    return a[0] + a[1] - a[2];
  };
  c.gradient = [](const Vector& a) {
    check_arity(a, 3, "ate");
    Vector g(3);
    g << 1.0, 1.0, -1.0;
    return g;
  };
  return c;
}

Combination late_combination() {
  Combination c;
  c.name = "late";
  c.value = [](const Vector& a) {
    check_arity(a, 6, "late");
    const double den = a[3] + a[4] - a[5];
    if (den == 0.0) fail(ErrorKind::DomainError, "late: first-stage denominator is zero");
    return (a[0] + a[1] - a[2]) / den;
  };
  c.gradient = [](const Vector& a) {
    check_arity(a, 6, "late");
    const double num = a[0] + a[1] - a[2];
    const double den = a[3] + a[4] - a[5];
    if (den == 0.0) fail(ErrorKind::DomainError, "late: first-stage denominator is zero");
    const double gn = 1.0 / den;
    const double gd = -num / (den * den);
    Vector g(6);
    g << gn, gn, -gn, gd, gd, -gd;
    return g;
  };
  return c;
}

}  // namespace trimdr
