#pragma once

#include "trimdr/legendre.hpp"

namespace trimdr {

/// Series least-squares fit of B on the Legendre basis evaluated at A.
/// Immutable once built.
struct SieveFit {
  LegendreBasis basis{0};
  Vector coef;            // beta-hat, solves gram * coef = E_n[p_K(A) B]
  Matrix gram;            // E_n[p_K(A) p_K(A)']
  double gram_condition = 1.0;
  double residual_variance = 0.0;
  double a_min = 0.0;
  double a_max = 0.0;
  int outside_unit_interval = 0;  // count of A values outside [0,1]

  int degree() const noexcept { return basis.degree(); }
  double fitted(double a) const;
  Vector fitted(const Vector& a) const;
};

/// Requires n >= K + 1. Ill-conditioned Gram matrices are reported together
/// with the range of A, which is usually the culprit.
SieveFit fit_sieve(const Vector& A, const Vector& B, int K);

/// kappa-th derivative of the fitted regression function at zero,
/// p_K^{(kappa)}(0)' beta-hat. kappa must lie in [0, K].
double deriv_at_zero(const SieveFit& fit, int kappa);

/// Per-observation influence of deriv_at_zero(fit, kappa):
/// p_K^{(kappa)}(0)' Gram^{-1} p_K(A_i) (B_i - m-hat(A_i)).
Vector psi_influence(const SieveFit& fit, const Vector& A, const Vector& B, int kappa);

}  // namespace trimdr
