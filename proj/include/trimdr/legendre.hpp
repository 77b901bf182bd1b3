#pragma once

#include "trimdr/numkit.hpp"

namespace trimdr {

/// Shifted orthonormal Legendre polynomials on [0,1]:
/// p_j(a) = sqrt(2j+1) * P_j(2a - 1), so that the integral of p_i p_j over
/// [0,1] is the Kronecker delta. Values and derivatives of every order come
/// from the three-term recurrence, differentiated analytically.
class LegendreBasis {
 public:
  explicit LegendreBasis(int degree);

  int degree() const noexcept { return degree_; }
  int size() const noexcept { return degree_ + 1; }

  /// (p_0(a), ..., p_K(a)). Arguments outside [0,1] are evaluated as-is.
  Vector eval(double a) const;

  /// order-th derivative of each basis polynomial at a. Orders above the
  /// degree give a zero vector; negative orders are rejected.
  Vector eval_deriv(double a, int order) const;

  /// Design matrix with rows p_K(a_i)'.
  Matrix design(const Vector& a) const;

 private:
  int degree_;
  Vector scale_;  // sqrt(2j+1)
};

}  // namespace trimdr
