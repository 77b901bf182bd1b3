#include "trimdr/legendre.hpp"

#include <cmath>
#include <vector>

namespace trimdr {

LegendreBasis::LegendreBasis(int degree) : degree_(degree), scale_(degree + 1) {
  require(degree >= 0, "LegendreBasis: negative degree");
  for (int j = 0; j <= degree; ++j) scale_[j] = std::sqrt(2.0 * j + 1.0);
}

Vector LegendreBasis::eval(double a) const { return eval_deriv(a, 0); }

Vector LegendreBasis::eval_deriv(double a, int order) const {
  require(order >= 0, "eval_deriv: negative derivative order");
  const int n = degree_ + 1;
  Vector out = Vector::Zero(n);
  if (order > degree_) return out;

  // d^r P_j / dx^r for r = 0..order on x = 2a - 1. Differentiating
  //   (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
  // r times gives
  //   (j+1) P_{j+1}^{(r)} = (2j+1) (x P_j^{(r)} + r P_j^{(r-1)}) - j P_{j-1}^{(r)}.
  const double x = 2.0 * a - 1.0;
  std::vector<Vector> deriv(order + 1, Vector::Zero(n));
  for (int r = 0; r <= order; ++r) {
    Vector& cur = deriv[r];
    cur[0] = (r == 0) ? 1.0 : 0.0;
    if (n > 1) cur[1] = (r == 0) ? x : (r == 1 ? 1.0 : 0.0);
    for (int j = 1; j + 1 < n; ++j) {
      double next = (2.0 * j + 1.0) * x * cur[j] - j * cur[j - 1];
      if (r > 0) next += (2.0 * j + 1.0) * r * deriv[r - 1][j];
      cur[j + 1] = next / (j + 1.0);
    }
  }
  // Chain rule for x = 2a - 1 contributes 2^order.
  out = deriv[order].cwiseProduct(scale_) * std::ldexp(1.0, order);
  return out;
}

Matrix LegendreBasis::design(const Vector& a) const {
  Matrix out(a.size(), size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.row(i) = eval(a[i]).transpose();
  return out;
}

}  // namespace trimdr
