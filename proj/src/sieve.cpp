#include "trimdr/sieve.hpp"

#include <sstream>

namespace trimdr {

double SieveFit::fitted(double a) const { return basis.eval(a).dot(coef); }

Vector SieveFit::fitted(const Vector& a) const { return basis.design(a) * coef; }

SieveFit fit_sieve(const Vector& A, const Vector& B, int K) {
  require(K >= 0, "fit_sieve: negative degree");
  require(A.size() == B.size(), "fit_sieve: A and B differ in length");
  const auto n = A.size();
  require(n >= K + 1, "fit_sieve: need at least K + 1 observations");
  if (!all_finite(A) || !all_finite(B)) fail(ErrorKind::NonFinite, "fit_sieve: non-finite input");

  SieveFit fit;
  fit.basis = LegendreBasis(K);
  const Matrix P = fit.basis.design(A);
  const double inv_n = 1.0 / static_cast<double>(n);
  fit.gram = (P.transpose() * P) * inv_n;
  fit.gram = 0.5 * (fit.gram + fit.gram.transpose());
  const Vector rhs = (P.transpose() * B) * inv_n;

  fit.a_min = A.minCoeff();
  fit.a_max = A.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (A[i] < 0.0 || A[i] > 1.0) ++fit.outside_unit_interval;
  }

  try {
    const auto sol = solve_spd(fit.gram, rhs);
    fit.coef = sol.x;
    fit.gram_condition = sol.condition;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    std::ostringstream msg;
    msg << "sieve Gram matrix is ill-conditioned (A in [" << fit.a_min << ", " << fit.a_max
        << "], K=" << K << "): " << e.what();
    fail(ErrorKind::IllConditioned, msg.str());
  }

  const Vector resid = B - P * fit.coef;
  fit.residual_variance = resid.squaredNorm() * inv_n;
  return fit;
}

double deriv_at_zero(const SieveFit& fit, int kappa) {
  require(kappa >= 0 && kappa <= fit.degree(), "deriv_at_zero: order outside [0, K]");
  return fit.basis.eval_deriv(0.0, kappa).dot(fit.coef);
}

Vector psi_influence(const SieveFit& fit, const Vector& A, const Vector& B, int kappa) {
  require(kappa >= 0 && kappa <= fit.degree(), "psi_influence: order outside [0, K]");
  require(A.size() == B.size(), "psi_influence: A and B differ in length");
  const Vector weights = solve_spd(fit.gram, fit.basis.eval_deriv(0.0, kappa)).x;
  const Matrix P = fit.basis.design(A);
  const Vector resid = B - P * fit.coef;
  return (P * weights).cwiseProduct(resid);
}

}  // namespace trimdr
