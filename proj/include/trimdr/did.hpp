#pragma once

#include <optional>
#include <string>

#include "trimdr/first_stage.hpp"
#include "trimdr/trim_core.hpp"

namespace trimdr {

/// Two-period panel: outcomes before and after, treatment indicator and a
/// covariate matrix whose first column is the intercept.
struct DidSample {
  Vector y0;
  Vector y1;
  Vector d;
  Matrix x;

  Eigen::Index size() const noexcept { return d.size(); }
  Vector delta_y() const { return y1 - y0; }
  void validate() const;
};

struct DidOptions {
  TrimConfig trim;
  Kernel kernel;
  std::optional<double> bandwidth;  // Silverman on the fitted scores when unset
  bool literal_alpha0 = false;      // use alpha2(0, gamma) in the last influence term
  int lower_grid = 512;             // trapezoid nodes on [0, 1-h]
  int upper_grid = 128;             // trapezoid nodes on [1-h, 1]
  double fd_step = 1e-4;
};

struct DidEstimate {
  double theta = 0.0;
  double se = 0.0;
  Vector influence;  // phi-hat_i
  Eigen::Index n = 0;
  TrimConfig trim;
  bool literal_alpha0 = false;
  double mean_d = 0.0;
  double b1_mean = 0.0;     // E_n[D (dY - nu)]
  AlphaResult alpha2;
  double alpha2_untrimmed = 0.0;  // alpha2-hat(0, gamma-hat)
  FirstStageFit first_stage;
  Vector dalpha2;
  std::string dalpha2_method;  // "kernel" or "exact"
  double bandwidth = 0.0;
  std::string kernel;

  int trimmed_count() const noexcept { return alpha2.trimmed_count; }
};

/// Logistic propensity on X ("propensity" block) and OLS of dY on X among
/// controls ("outcome" block).
FirstStageFit did_first_stage(const DidSample& data);

/// B1 = D(dY - nu), (A2, B2) = (1 - P, P(1-D)(dY - nu)), B3 = D with
/// P = pi(X'g1), nu = X'g2 and gamma = (g1', g2')'.
EstimandSpec did_spec(const DidSample& data);

/// Point estimate only; influence and SE are left empty.
DidEstimate did_point_estimate(const DidSample& data, const DidOptions& opts);

enum class TauKind { Density = 1, Residual = 2 };

/// Kernel-weighted means E_n[(1/b) K((P - p)/b)] (Density) and
/// E_n[(1-D)(dY - nu)(1/b) K((P - p)/b)] (Residual).
double kernel_tau(const DidSample& data, const Vector& gamma, double p, double b, TauKind which,
                  const Kernel& kernel = {});

/// Kernel-smoothed version of alpha2(h, gamma):
///   int_0^{1-h} p/(1-p) tau2(p) dp
///   + sum_kappa int_{1-h}^1 (1-p)^{kappa-1} tau1(p) dp / kappa! * m2^(kappa)(0; gamma)
double smoothed_alpha2(const DidSample& data, const Vector& gamma, const TrimConfig& cfg, double b,
                       const Kernel& kernel = {}, int lower_grid = 512, int upper_grid = 128);

/// Central finite differences of smoothed_alpha2 in gamma. Requires h > 0.
Vector dalpha2_dgamma(const DidSample& data, const Vector& gamma, const TrimConfig& cfg, double b,
                      const Kernel& kernel = {}, int lower_grid = 512, int upper_grid = 128,
                      double fd_step = 1e-4);

/// Per-observation phi-hat from the assembled ingredients. alpha2_last is the
/// alpha2 value used in the final D term.
Vector did_influence(const DidSample& data, const FirstStageFit& fs, const AlphaResult& alpha2,
                     const Vector& dalpha2, double alpha2_last);

/// Full pipeline: point estimate, influence function and standard error.
DidEstimate did_estimate(const DidSample& data, const DidOptions& opts = {});

}  // namespace trimdr
