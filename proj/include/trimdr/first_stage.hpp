#pragma once

#include <string>
#include <vector>

#include "trimdr/numkit.hpp"

namespace trimdr {

double logistic(double v);

struct LogisticFit {
  Vector coef;
  Matrix phi;      // n x p, rows E_n[XX' pi(1-pi)]^{-1} X_i (D_i - pi_i)
  Vector fitted;   // pi(X_i' coef)
  int iterations = 0;
  double grad_norm = 0.0;
  double hessian_condition = 1.0;
};

struct NewtonOptions {
  double grad_tol = 1e-10;
  int max_iter = 100;
  double separation_bound = 30.0;
};

/// Logistic maximum likelihood by Newton-Raphson with step halving. The
/// gradient norm is taken on the mean log-likelihood. X should carry its own
/// intercept column.
LogisticFit fit_logistic(const Matrix& X, const Vector& D, const NewtonOptions& opts = {});

struct OlsFit {
  Vector coef;
  Matrix phi;  // n x p, zero rows where mask = 0
  Vector residual;
  int used = 0;
};

/// OLS of y on X restricted to rows with mask = 1. The influence rows are
/// normalized by the full-sample moment E_n[mask X X'], so they are aligned
/// with the other blocks. y is never read where mask = 0.
OlsFit fit_ols_subsample(const Matrix& X, const Vector& y, const Vector& mask);

/// Stacked first-stage parameter and influence matrix.
struct FirstStageFit {
  struct Block {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
  };

  Vector gamma;
  Matrix phi;  // n x dim(gamma)
  std::vector<Block> blocks;
  int logit_iterations = 0;
  double logit_grad_norm = 0.0;

  void append(const std::string& name, const Vector& coef, const Matrix& block_phi);
  const Block& block(const std::string& name) const;
  Vector segment(const Vector& full, const std::string& name) const;
};

}  // namespace trimdr
