#include "trimdr/did.hpp"

#include <cmath>
#include <memory>

namespace trimdr {

void DidSample::validate() const {
  const auto n = d.size();
  if (y0.size() != n || y1.size() != n || x.rows() != n) {
    fail(ErrorKind::Precondition, "DidSample: y0, y1, d and x must have equal length");
  }
  require(n > 0 && x.cols() > 0, "DidSample: empty sample");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(d[i] == 0.0 || d[i] == 1.0, "DidSample: d must be binary");
  }
  const double mean_d = sample_mean(d);
  if (!(mean_d > 0.0 && mean_d < 1.0)) {
    fail(ErrorKind::Precondition, "DidSample: need both treated and control units (0 < mean(d) < 1)");
  }
  if (!all_finite(y0) || !all_finite(y1) || !all_finite(x)) {
    fail(ErrorKind::NonFinite, "DidSample: non-finite outcome or covariate");
  }
}

FirstStageFit did_first_stage(const DidSample& data) {
  FirstStageFit fs;
  const LogisticFit ps = fit_logistic(data.x, data.d);
  fs.append("propensity", ps.coef, ps.phi);
  fs.logit_iterations = ps.iterations;
  fs.logit_grad_norm = ps.grad_norm;
  const Vector controls = Vector::Ones(data.size()) - data.d;
  const OlsFit nu = fit_ols_subsample(data.x, data.delta_y(), controls);
  fs.append("outcome", nu.coef, nu.phi);
  return fs;
}

namespace {

struct DidParts {
  Vector p;         // P(X; g1)
  Vector one_m_p;   // 1 - P(X; g1), computed without cancellation
  Vector resid;     // dY - X'g2
};

DidParts did_parts(const DidSample& data, const Vector& gamma) {
  const auto p = data.x.cols();
  require(gamma.size() == 2 * p, "did: gamma must stack propensity and outcome coefficients");
  const Vector eta = data.x * gamma.head(p);
  DidParts parts;
  parts.p.resize(eta.size());
  parts.one_m_p.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    parts.p[i] = logistic(eta[i]);
    parts.one_m_p[i] = logistic(-eta[i]);
  }
  parts.resid = data.delta_y() - data.x * gamma.tail(p);
  return parts;
}

Vector control_residual(const DidSample& data, const DidParts& parts) {
  return (Vector::Ones(data.size()) - data.d).cwiseProduct(parts.resid);
}

// Per-observation trapezoid integrals of the scaled kernel against the
// weight functions appearing in the smoothed alpha2 functional.
struct KernelIntegrals {
  Vector lower;             // int_0^{1-h} p/(1-p) K_b(P_i - p) dp
  Matrix upper;             // n x k, int_{1-h}^1 (1-p)^{kappa-1} K_b(P_i - p) dp
  double total_mass = 0.0;  // sum_i int_0^1 K_b(P_i - p) dp
};

struct Grid {
  double start = 0.0;
  double step = 0.0;
  int size = 0;
  Vector nodes;
  Vector weights;  // trapezoid weights
};

Grid make_grid(double a, double b, int npoints) {
  require(npoints >= 2, "integration grid needs at least two nodes");
  Grid g;
  g.start = a;
  g.size = npoints;
  g.step = (b - a) / (npoints - 1);
  g.nodes.resize(npoints);
  g.weights = Vector::Constant(npoints, g.step);
  for (int j = 0; j < npoints; ++j) g.nodes[j] = (j == npoints - 1) ? b : a + j * g.step;
  g.weights[0] *= 0.5;
  g.weights[npoints - 1] *= 0.5;
  return g;
}

// Kernel evaluations beyond this many bandwidths are below 1e-31 and skipped.
constexpr double kGaussianCutoff = 12.0;

template <typename Fn>
void for_each_node(const Grid& g, double center, double radius, Fn&& fn) {
  int lo = 0;
  int hi = g.size - 1;
  if (std::isfinite(radius) && g.step > 0.0) {
    lo = std::max(0, static_cast<int>(std::floor((center - radius - g.start) / g.step)));
    hi = std::min(g.size - 1, static_cast<int>(std::ceil((center + radius - g.start) / g.step)));
  }
  for (int j = lo; j <= hi; ++j) fn(j);
}

KernelIntegrals kernel_integrals(const Vector& scores, const TrimConfig& cfg, double b,
                                 const Kernel& kernel, int lower_grid, int upper_grid) {
  const auto n = scores.size();
  const Grid lower = make_grid(0.0, 1.0 - cfg.h, lower_grid);
  const Grid upper = make_grid(1.0 - cfg.h, 1.0, upper_grid);
  Vector lower_weight(lower.size);
  for (int j = 0; j < lower.size; ++j) {
    lower_weight[j] = lower.weights[j] * lower.nodes[j] / (1.0 - lower.nodes[j]);
  }
  Matrix upper_weight(upper.size, cfg.k);
  for (int j = 0; j < upper.size; ++j) {
    double power = 1.0;
    for (int kappa = 1; kappa <= cfg.k; ++kappa) {
      upper_weight(j, kappa - 1) = upper.weights[j] * power;
      power *= 1.0 - upper.nodes[j];
    }
  }

  const double radius =
      (kernel.type == KernelType::Gaussian ? kGaussianCutoff : kernel.support_radius()) * b;
  KernelIntegrals out;
  out.lower = Vector::Zero(n);
  out.upper = Matrix::Zero(n, cfg.k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double center = scores[i];
    double lower_sum = 0.0;
    double mass = 0.0;
    for_each_node(lower, center, radius, [&](int j) {
      const double kv = kernel((center - lower.nodes[j]) / b) / b;
      lower_sum += lower_weight[j] * kv;
      mass += lower.weights[j] * kv;
    });
    for_each_node(upper, center, radius, [&](int j) {
      const double kv = kernel((center - upper.nodes[j]) / b) / b;
      out.upper.row(i) += upper_weight.row(j) * kv;
      mass += upper.weights[j] * kv;
    });
    out.lower[i] = lower_sum;
    out.total_mass += mass;
  }
  if (!(out.total_mass > 1e-300) || !all_finite(out.lower) || !all_finite(out.upper)) {
    fail(ErrorKind::NonFinite, "kernel mass vanishes on the integration grid");
  }
  return out;
}

double smoothed_from(const KernelIntegrals& ki, const DidSample& data, const DidParts& parts,
                     const TrimConfig& cfg) {
  const Vector w = control_residual(data, parts);
  double value = sample_mean(w.cwiseProduct(ki.lower));
  const Vector b2 = parts.p.cwiseProduct(w);
  const SieveFit fit = fit_sieve(parts.one_m_p, b2, cfg.K);
  for (int kappa = 1; kappa <= cfg.k; ++kappa) {
    value += sample_mean(ki.upper.col(kappa - 1)) / factorial(kappa) * deriv_at_zero(fit, kappa);
  }
  return value;
}

}  // namespace

EstimandSpec did_spec(const DidSample& data) {
  auto shared = std::make_shared<const DidSample>(data);
  EstimandSpec spec;
  spec.combination = did_combination();

  MomentComponent b1;
  b1.label = "B1";
  b1.trivial_denominator = true;
  b1.evaluate = [shared](const Vector& gamma) {
    const DidParts parts = did_parts(*shared, gamma);
    MomentValues v;
    v.A = Vector::Ones(shared->size());
    v.B = shared->d.cwiseProduct(parts.resid);
    return v;
  };

  MomentComponent a2;
  a2.label = "B2/A2";
  a2.evaluate = [shared](const Vector& gamma) {
    const DidParts parts = did_parts(*shared, gamma);
    MomentValues v;
    v.A = parts.one_m_p;
    v.B = parts.p.cwiseProduct(control_residual(*shared, parts));
    return v;
  };

  MomentComponent b3;
  b3.label = "B3";
  b3.trivial_denominator = true;
  b3.evaluate = [shared](const Vector&) {
    MomentValues v;
    v.A = Vector::Ones(shared->size());
    v.B = shared->d;
    return v;
  };

  spec.components = {b1, a2, b3};
  return spec;
}

DidEstimate did_point_estimate(const DidSample& data, const DidOptions& opts) {
  data.validate();
  opts.trim.validate();

  DidEstimate est;
  est.n = data.size();
  est.trim = opts.trim;
  est.literal_alpha0 = opts.literal_alpha0;
  est.kernel = std::string(opts.kernel.name());
  est.first_stage = did_first_stage(data);

  const EstimandSpec spec = did_spec(data);
  const Vector& gamma = est.first_stage.gamma;
  const AlphaResult b1 = alpha_hat(spec.components[0], gamma, opts.trim);
  est.alpha2 = alpha_hat(spec.components[1], gamma, opts.trim);
  const AlphaResult b3 = alpha_hat(spec.components[2], gamma, opts.trim);
  est.b1_mean = b1.value;
  est.mean_d = b3.value;

  const Vector& A2 = est.alpha2.values.A;
  const Vector& B2 = est.alpha2.values.B;
  est.alpha2_untrimmed = sample_mean(B2.cwiseQuotient(A2));

  Vector alphas(3);
  alphas << est.b1_mean, est.alpha2.value, est.mean_d;
  est.theta = assemble_theta(spec, alphas);
  return est;
}

double kernel_tau(const DidSample& data, const Vector& gamma, double p, double b, TauKind which,
                  const Kernel& kernel) {
  require(b > 0.0, "kernel_tau: bandwidth must be positive");
  const DidParts parts = did_parts(data, gamma);
  const Vector w = control_residual(data, parts);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double kv = kernel((parts.p[i] - p) / b) / b;
    sum += (which == TauKind::Density) ? kv : w[i] * kv;
  }
  return sum / static_cast<double>(data.size());
}

double smoothed_alpha2(const DidSample& data, const Vector& gamma, const TrimConfig& cfg, double b,
                       const Kernel& kernel, int lower_grid, int upper_grid) {
  require(cfg.h > 0.0, "smoothed_alpha2: requires h > 0");
  require(b > 0.0, "smoothed_alpha2: bandwidth must be positive");
  cfg.validate();
  const DidParts parts = did_parts(data, gamma);
  const KernelIntegrals ki = kernel_integrals(parts.p, cfg, b, kernel, lower_grid, upper_grid);
  return smoothed_from(ki, data, parts, cfg);
}

Vector dalpha2_dgamma(const DidSample& data, const Vector& gamma, const TrimConfig& cfg, double b,
                      const Kernel& kernel, int lower_grid, int upper_grid, double fd_step) {
  require(cfg.h > 0.0, "dalpha2_dgamma: requires h > 0");
  require(b > 0.0, "dalpha2_dgamma: bandwidth must be positive");
  cfg.validate();
  const auto p = data.x.cols();
  require(gamma.size() == 2 * p, "dalpha2_dgamma: gamma has wrong length");

  // The kernel integrals only depend on the propensity block, so outcome
  // coordinates reuse the ones computed at gamma.
  const DidParts base_parts = did_parts(data, gamma);
  const KernelIntegrals base = kernel_integrals(base_parts.p, cfg, b, kernel, lower_grid, upper_grid);

  Vector grad(gamma.size());
  Vector shifted = gamma;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    const double step = fd_step * (1.0 + std::abs(gamma[j]));
    double values[2];
    for (int side = 0; side < 2; ++side) {
      shifted[j] = gamma[j] + (side == 0 ? step : -step);
      const DidParts parts = did_parts(data, shifted);
      if (j < p) {
        const KernelIntegrals ki = kernel_integrals(parts.p, cfg, b, kernel, lower_grid, upper_grid);
        values[side] = smoothed_from(ki, data, parts, cfg);
      } else {
        values[side] = smoothed_from(base, data, parts, cfg);
      }
    }
    shifted[j] = gamma[j];
    grad[j] = (values[0] - values[1]) / (2.0 * step);
  }
  return grad;
}

Vector did_influence(const DidSample& data, const FirstStageFit& fs, const AlphaResult& alpha2,
                     const Vector& dalpha2, double alpha2_last) {
  const auto n = data.size();
  const auto p = data.x.cols();
  require(fs.phi.rows() == n && fs.gamma.size() == 2 * p, "did_influence: first stage does not match data");

  const Vector b1 = data.d.cwiseProduct(data.delta_y() - data.x * fs.segment(fs.gamma, "outcome"));
  const double mean_d = sample_mean(data.d);
  const double mean_b1 = sample_mean(b1);

  // E_n[D dnu/dgamma'] is zero on the propensity block and E_n[D X'] on the
  // outcome block.
  Vector dnu = Vector::Zero(2 * p);
  dnu.tail(p) = column_means(data.x.array().colwise() * data.d.array());

  const Vector omega2 = omega_contributions(alpha2, dalpha2, fs.phi);
  const Vector first = (b1 - fs.phi * dnu) / mean_d;
  const double last = (mean_b1 - alpha2_last) / (mean_d * mean_d);
  return first - omega2 / mean_d - last * data.d;
}

DidEstimate did_estimate(const DidSample& data, const DidOptions& opts) {
  DidEstimate est = did_point_estimate(data, opts);
  const Vector& gamma = est.first_stage.gamma;
  const DidParts parts = did_parts(data, gamma);
  est.bandwidth = opts.bandwidth ? *opts.bandwidth : silverman_bandwidth(parts.p);

  if (est.alpha2.trimmed_count > 0) {
    if (!(est.bandwidth > 0.0)) {
      fail(ErrorKind::NonFinite, "kernel bandwidth is zero: fitted propensity scores are constant");
    }
    est.dalpha2_method = "kernel";
    est.dalpha2 = dalpha2_dgamma(data, gamma, opts.trim, est.bandwidth, opts.kernel, opts.lower_grid,
                                 opts.upper_grid, opts.fd_step);
  } else {
    est.dalpha2_method = "exact";
    const EstimandSpec spec = did_spec(data);
    const auto& comp = spec.components[1];
    const double h = opts.trim.h;
    auto moment = [&comp, h](const Vector& g) {
      const MomentValues v = comp.evaluate(g);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < v.B.size(); ++i) {
        if (std::abs(v.A[i]) >= h) sum += v.B[i] / v.A[i];
      }
      Vector out(1);
      out[0] = sum / static_cast<double>(v.B.size());
      return out;
    };
    est.dalpha2 = central_fd(moment, gamma, opts.fd_step).row(0).transpose();
  }

  const double alpha2_last = opts.literal_alpha0 ? est.alpha2_untrimmed : est.alpha2.value;
  est.influence = did_influence(data, est.first_stage, est.alpha2, est.dalpha2, alpha2_last);
  est.se = sample_sd(est.influence) / std::sqrt(static_cast<double>(est.n));
  return est;
}

}  // namespace trimdr
