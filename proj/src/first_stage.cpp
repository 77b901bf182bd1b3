#include "trimdr/first_stage.hpp"

#include <cmath>
#include <sstream>

namespace trimdr {

double logistic(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

namespace {

// Mean log-likelihood, computed without overflow for large |eta|.
double mean_loglik(const Vector& eta, const Vector& D) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double log1pexp = std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e)));
    ll += D[i] * e - log1pexp;
  }
  return ll / static_cast<double>(eta.size());
}

bool one_class_separated(const Vector& eta, const Vector& D, double bound) {
  bool ones = true;
  bool zeros = true;
  bool have_one = false;
  bool have_zero = false;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (D[i] == 1.0) {
      have_one = true;
      ones = ones && eta[i] > bound;
    } else {
      have_zero = true;
      zeros = zeros && eta[i] < -bound;
    }
  }
  return (have_one && ones) || (have_zero && zeros);
}

Matrix weighted_cross(const Matrix& X, const Vector& w) {
  const Matrix WX = X.array().colwise() * w.array();
  Matrix out = (X.transpose() * WX) / static_cast<double>(X.rows());
  return 0.5 * (out + out.transpose());
}

}  // namespace

LogisticFit fit_logistic(const Matrix& X, const Vector& D, const NewtonOptions& opts) {
  const auto n = X.rows();
  const auto p = X.cols();
  require(D.size() == n, "fit_logistic: X and D differ in length");
  require(n > p, "fit_logistic: need more observations than coefficients");
  if (!all_finite(X) || !all_finite(D)) fail(ErrorKind::NonFinite, "fit_logistic: non-finite input");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(D[i] == 0.0 || D[i] == 1.0, "fit_logistic: D must be binary");
  }

  LogisticFit fit;
  fit.coef = Vector::Zero(p);
  Vector eta = X * fit.coef;
  double ll = mean_loglik(eta, D);
  const double inv_n = 1.0 / static_cast<double>(n);

  auto probabilities = [](const Vector& e) {
    Vector pi(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) pi[i] = logistic(e[i]);
    return pi;
  };

  bool converged = false;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    fit.fitted = probabilities(eta);
    const Vector grad = X.transpose() * (D - fit.fitted) * inv_n;
    fit.grad_norm = grad.norm();
    fit.iterations = iter;
    if (fit.grad_norm <= opts.grad_tol) {
      converged = true;
      break;
    }
    if (iter == opts.max_iter) break;

    const Vector w = fit.fitted.cwiseProduct(Vector::Ones(n) - fit.fitted);
    const Vector step = solve_spd(weighted_cross(X, w), grad).x;

    double t = 1.0;
    Vector trial = fit.coef + step;
    Vector trial_eta = X * trial;
    double trial_ll = mean_loglik(trial_eta, D);
    for (int halving = 0; halving < 40 && !(trial_ll >= ll - 1e-14 * std::abs(ll)); ++halving) {
      t *= 0.5;
      trial = fit.coef + t * step;
      trial_eta = X * trial;
      trial_ll = mean_loglik(trial_eta, D);
    }
    fit.coef = trial;
    eta = trial_eta;
    ll = trial_ll;

    if (fit.coef.norm() > opts.separation_bound &&
        one_class_separated(eta, D, opts.separation_bound)) {
      fail(ErrorKind::Separation, "fit_logistic: one class is perfectly predicted (|X'g| > 30)");
    }
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "fit_logistic: no convergence after " << opts.max_iter
        << " iterations (gradient norm " << fit.grad_norm << ")";
    if (fit.coef.norm() > opts.separation_bound) {
      fail(ErrorKind::Separation, msg.str() + "; coefficients diverging");
    }
    fail(ErrorKind::NoConvergence, msg.str());
  }

  bool all_classified = true;
  for (Eigen::Index i = 0; i < n && all_classified; ++i) {
    all_classified = (D[i] == 1.0) ? eta[i] > 0.0 : eta[i] < 0.0;
  }
  if (all_classified) {
    fail(ErrorKind::Separation, "fit_logistic: X'g separates the two classes, no finite maximum exists");
  }

  const Vector w = fit.fitted.cwiseProduct(Vector::Ones(n) - fit.fitted);
  const Vector resid = D - fit.fitted;
  const Matrix scores = X.array().colwise() * resid.array();
  fit.phi = solve_spd(weighted_cross(X, w), Matrix(scores.transpose()), &fit.hessian_condition)
                .transpose();
  return fit;
}

OlsFit fit_ols_subsample(const Matrix& X, const Vector& y, const Vector& mask) {
  const auto n = X.rows();
  const auto p = X.cols();
  require(y.size() == n && mask.size() == n, "fit_ols_subsample: X, y and mask differ in length");

  OlsFit fit;
  Vector rhs = Vector::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(mask[i] == 0.0 || mask[i] == 1.0, "fit_ols_subsample: mask must be binary");
    if (mask[i] == 1.0) {
      ++fit.used;
      rhs += X.row(i).transpose() * y[i];
    }
  }
  if (fit.used < p) fail(ErrorKind::RankDeficient, "fit_ols_subsample: fewer rows than regressors");
  if (!all_finite(rhs)) fail(ErrorKind::NonFinite, "fit_ols_subsample: non-finite data in subsample");
  rhs /= static_cast<double>(n);

  const Matrix M = weighted_cross(X, mask);
  double condition = 1.0;
  try {
    fit.coef = solve_spd(M, rhs).x;
    fit.phi = Matrix::Zero(n, p);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    fail(ErrorKind::RankDeficient, std::string("fit_ols_subsample: design is rank deficient: ") + e.what());
  }

  fit.residual = Vector::Zero(n);
  Matrix scores = Matrix::Zero(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[i] == 1.0) {
      fit.residual[i] = y[i] - X.row(i).dot(fit.coef);
      scores.row(i) = X.row(i) * fit.residual[i];
    }
  }
  fit.phi = solve_spd(M, Matrix(scores.transpose()), &condition).transpose();
  return fit;
}

void FirstStageFit::append(const std::string& name, const Vector& coef, const Matrix& block_phi) {
  require(block_phi.cols() == coef.size(), "FirstStageFit::append: phi width differs from coefficients");
  require(phi.size() == 0 || block_phi.rows() == phi.rows(), "FirstStageFit::append: row mismatch");
  Block b{name, gamma.size(), coef.size()};
  Vector g(gamma.size() + coef.size());
  g << gamma, coef;
  gamma = std::move(g);
  Matrix m(block_phi.rows(), phi.cols() + block_phi.cols());
  if (phi.cols() > 0) m.leftCols(phi.cols()) = phi;
  m.rightCols(block_phi.cols()) = block_phi;
  phi = std::move(m);
  blocks.push_back(std::move(b));
}

const FirstStageFit::Block& FirstStageFit::block(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  fail(ErrorKind::Precondition, "FirstStageFit: no block named '" + name + "'");
}

Vector FirstStageFit::segment(const Vector& full, const std::string& name) const {
  const auto& b = block(name);
  require(full.size() == gamma.size(), "FirstStageFit::segment: vector has wrong length");
  return full.segment(b.offset, b.size);
}

}  // namespace trimdr
