#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trimdr/first_stage.hpp"
#include "trimdr/trim_core.hpp"

namespace trimdr {

struct AteSample {
  Vector y;
  Vector d;
  Matrix x;  // intercept first

  Eigen::Index size() const noexcept { return y.size(); }
  void validate() const;
};

struct LateSample {
  Vector y;
  Vector d;
  Vector z;
  Matrix x;  // intercept first

  Eigen::Index size() const noexcept { return y.size(); }
  void validate() const;
};

struct SmoothingOptions {
  Kernel kernel;
  std::optional<double> bandwidth;  // Silverman on each denominator when unset
  int outer_grid = 512;             // nodes on [h, 1]
  int inner_grid = 128;             // nodes on [0, h]
  double fd_step = 1e-4;
};

struct ComponentDiagnostics {
  std::string label;
  double alpha = 0.0;
  int trimmed_count = 0;
  std::optional<double> gram_condition;
  std::optional<double> bandwidth;
  std::string dalpha_method;  // "mean", "exact" or "kernel"
};

struct EstimateResult {
  std::string estimand;
  double theta = 0.0;
  double se = 0.0;
  bool se_experimental = false;
  Vector influence;
  Eigen::Index n = 0;
  TrimConfig trim;
  Vector alphas;
  std::vector<ComponentDiagnostics> components;
  FirstStageFit first_stage;

  int trimmed_count() const;
};

/// Smoothed counterpart of alpha(h, gamma) for a component with denominator
/// A in [0, 1]:
///   int_h^1 (1/a) E_n[B K_b(A - a)] da
///   + sum_kappa int_0^h a^{kappa-1} E_n[K_b(A - a)] da / kappa! * m^(kappa)(0)
double smoothed_alpha(const MomentValues& values, const TrimConfig& cfg, double bandwidth,
                      const SmoothingOptions& opts);

/// Derivative of alpha_l in gamma. Trivial components and components with
/// nothing trimmed are differentiated directly; otherwise the smoothed
/// functional is.
Vector dalpha_dgamma(const MomentComponent& comp, const Vector& gamma, const AlphaResult& alpha,
                     const TrimConfig& cfg, const SmoothingOptions& opts,
                     ComponentDiagnostics* diag = nullptr);

/// Estimate, influence function and SE for any EstimandSpec given a fitted
/// first stage. The influence function is sum_l Lambda_l(alpha-hat) omega_l.
EstimateResult estimate_generic(const std::string& name, const EstimandSpec& spec,
                                const FirstStageFit& fs, const TrimConfig& cfg,
                                const SmoothingOptions& opts = {});

FirstStageFit ate_first_stage(const AteSample& data);
/// Components: X'(g_nu1 - g_nu0) (trivial); (P, (Y - nu1) D); (1 - P, (Y - nu0)(1 - D)).
EstimandSpec ate_spec(const AteSample& data);
EstimateResult ate_estimate(const AteSample& data, const TrimConfig& cfg,
                            const SmoothingOptions& opts = {});

inline constexpr double kMinLateDenominator = 0.01;

FirstStageFit late_first_stage(const LateSample& data);
EstimandSpec late_spec(const LateSample& data);
/// Ratio estimand; the SE is reported but marked experimental.
EstimateResult late_estimate(const LateSample& data, const TrimConfig& cfg,
                             const SmoothingOptions& opts = {});

}  // namespace trimdr
