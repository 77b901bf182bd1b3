#include "trimdr/estimands.hpp"

#include <cmath>
#include <memory>

namespace trimdr {

namespace {

void check_binary(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) fail(ErrorKind::Precondition, std::string(what) + " must be binary");
  }
}

void check_share(const Vector& v, const char* what) {
  const double m = sample_mean(v);
  if (!(m > 0.0 && m < 1.0)) {
    fail(ErrorKind::Precondition, std::string("mean of ") + what + " must lie strictly between 0 and 1");
  }
}

constexpr double kGaussianCutoff = 12.0;

struct NodeSet {
  Vector nodes;
  Vector weights;
};

NodeSet trapezoid_nodes(double a, double b, int npoints) {
  require(npoints >= 2, "integration grid needs at least two nodes");
  NodeSet s;
  s.nodes.resize(npoints);
  s.weights = Vector::Constant(npoints, (b - a) / (npoints - 1));
  for (int j = 0; j < npoints; ++j) {
    s.nodes[j] = (j == npoints - 1) ? b : a + j * (b - a) / (npoints - 1);
  }
  s.weights[0] *= 0.5;
  s.weights[npoints - 1] *= 0.5;
  return s;
}

struct SmoothIntegrals {
  Vector outer;  // int_h^1 (1/a) K_b(A_i - a) da
  Matrix inner;  // int_0^h a^{kappa-1} K_b(A_i - a) da
};

SmoothIntegrals smooth_integrals(const Vector& A, const TrimConfig& cfg, double b,
                                 const SmoothingOptions& opts) {
  const NodeSet outer = trapezoid_nodes(cfg.h, 1.0, opts.outer_grid);
  const NodeSet inner = trapezoid_nodes(0.0, cfg.h, opts.inner_grid);
  const double radius = (opts.kernel.type == KernelType::Gaussian ? kGaussianCutoff
                                                                   : opts.kernel.support_radius()) * b;
  SmoothIntegrals out;
  out.outer = Vector::Zero(A.size());
  out.inner = Matrix::Zero(A.size(), cfg.k);
  double mass = 0.0;
  for (Eigen::Index i = 0; i < A.size(); ++i) {
    for (Eigen::Index j = 0; j < outer.nodes.size(); ++j) {
      const double u = A[i] - outer.nodes[j];
      if (std::abs(u) > radius) continue;
      const double kv = opts.kernel(u / b) / b;
      out.outer[i] += outer.weights[j] / outer.nodes[j] * kv;
      mass += outer.weights[j] * kv;
    }
    for (Eigen::Index j = 0; j < inner.nodes.size(); ++j) {
      const double u = A[i] - inner.nodes[j];
      if (std::abs(u) > radius) continue;
      const double kv = opts.kernel(u / b) / b;
      double power = inner.weights[j];
      for (int kappa = 1; kappa <= cfg.k; ++kappa) {
        out.inner(i, kappa - 1) += power * kv;
        power *= inner.nodes[j];
      }
      mass += inner.weights[j] * kv;
    }
  }
  if (!(mass > 1e-300)) fail(ErrorKind::NonFinite, "kernel mass vanishes on the integration grid");
  return out;
}

double smoothed_from(const SmoothIntegrals& si, const MomentValues& values, const TrimConfig& cfg) {
  double value = sample_mean(values.B.cwiseProduct(si.outer));
  const SieveFit fit = fit_sieve(values.A, values.B, cfg.K);
  for (int kappa = 1; kappa <= cfg.k; ++kappa) {
    value += sample_mean(si.inner.col(kappa - 1)) / factorial(kappa) * deriv_at_zero(fit, kappa);
  }
  return value;
}

Vector scalar(double v) {
  Vector out(1);
  out[0] = v;
  return out;
}

}  // namespace

void AteSample::validate() const {
  const auto n = y.size();
  if (d.size() != n || x.rows() != n) fail(ErrorKind::Precondition, "AteSample: column lengths differ");
  require(n > 0 && x.cols() > 0, "AteSample: empty sample");
  check_binary(d, "d");
  check_share(d, "d");
  if (!all_finite(y) || !all_finite(x)) fail(ErrorKind::NonFinite, "AteSample: non-finite data");
}

void LateSample::validate() const {
  const auto n = y.size();
  if (d.size() != n || z.size() != n || x.rows() != n) {
    fail(ErrorKind::Precondition, "LateSample: column lengths differ");
  }
  require(n > 0 && x.cols() > 0, "LateSample: empty sample");
  check_binary(d, "d");
  check_binary(z, "z");
  check_share(z, "z");
  if (!all_finite(y) || !all_finite(x)) fail(ErrorKind::NonFinite, "LateSample: non-finite data");
}

int EstimateResult::trimmed_count() const {
  int total = 0;
  for (const auto& c : components) total += c.trimmed_count;
  return total;
}

double smoothed_alpha(const MomentValues& values, const TrimConfig& cfg, double bandwidth,
                      const SmoothingOptions& opts) {
  require(cfg.h > 0.0, "smoothed_alpha: requires h > 0");
  require(bandwidth > 0.0, "smoothed_alpha: bandwidth must be positive");
  return smoothed_from(smooth_integrals(values.A, cfg, bandwidth, opts), values, cfg);
}

Vector dalpha_dgamma(const MomentComponent& comp, const Vector& gamma, const AlphaResult& alpha,
                     const TrimConfig& cfg, const SmoothingOptions& opts,
                     ComponentDiagnostics* diag) {
  if (alpha.trivial) {
    if (diag) diag->dalpha_method = "mean";
    auto f = [&comp](const Vector& g) { return scalar(sample_mean(comp.evaluate(g).B)); };
    return central_fd(f, gamma, opts.fd_step).row(0).transpose();
  }

  if (alpha.trimmed_count == 0) {
    if (diag) diag->dalpha_method = "exact";
    const double h = cfg.h;
    auto f = [&comp, h](const Vector& g) {
      const MomentValues v = comp.evaluate(g);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < v.B.size(); ++i) {
        if (std::abs(v.A[i]) >= h) sum += v.B[i] / v.A[i];
      }
      return scalar(sum / static_cast<double>(v.B.size()));
    };
    return central_fd(f, gamma, opts.fd_step).row(0).transpose();
  }

  const double b = opts.bandwidth ? *opts.bandwidth : silverman_bandwidth(alpha.values.A);
  if (!(b > 0.0)) fail(ErrorKind::NonFinite, comp.label + ": denominator is constant, bandwidth is zero");
  if (diag) {
    diag->dalpha_method = "kernel";
    diag->bandwidth = b;
  }

  // Kernel integrals depend on gamma only through A; reuse them whenever a
  // coordinate leaves A untouched.
  const SmoothIntegrals base = smooth_integrals(alpha.values.A, cfg, b, opts);
  auto f = [&](const Vector& g) {
    const MomentValues v = comp.evaluate(g);
    if (v.A == alpha.values.A) return scalar(smoothed_from(base, v, cfg));
    return scalar(smoothed_from(smooth_integrals(v.A, cfg, b, opts), v, cfg));
  };
  return central_fd(f, gamma, opts.fd_step).row(0).transpose();
}

EstimateResult estimate_generic(const std::string& name, const EstimandSpec& spec,
                                const FirstStageFit& fs, const TrimConfig& cfg,
                                const SmoothingOptions& opts) {
  cfg.validate();
  const auto L = static_cast<Eigen::Index>(spec.components.size());
  require(L > 0, "estimate_generic: no components");

  EstimateResult res;
  res.estimand = name;
  res.trim = cfg;
  res.first_stage = fs;
  res.alphas.resize(L);

  std::vector<AlphaResult> alphas;
  alphas.reserve(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const auto& comp = spec.components[l];
    alphas.push_back(alpha_hat(comp, fs.gamma, cfg));
    res.alphas[l] = alphas.back().value;
    ComponentDiagnostics diag;
    diag.label = comp.label;
    diag.alpha = alphas.back().value;
    diag.trimmed_count = alphas.back().trimmed_count;
    if (alphas.back().sieve) diag.gram_condition = alphas.back().sieve->gram_condition;
    res.components.push_back(diag);
  }
  res.theta = assemble_theta(spec, res.alphas);
  res.n = alphas.front().values.B.size();

  const Vector lambda_grad = spec.combination.gradient(res.alphas);
  res.influence = Vector::Zero(res.n);
  for (Eigen::Index l = 0; l < L; ++l) {
    const Vector grad = dalpha_dgamma(spec.components[l], fs.gamma, alphas[l], cfg, opts,
                                      &res.components[l]);
    res.influence += lambda_grad[l] * omega_contributions(alphas[l], grad, fs.phi);
  }
  res.se = sample_sd(res.influence) / std::sqrt(static_cast<double>(res.n));
  return res;
}

FirstStageFit ate_first_stage(const AteSample& data) {
  FirstStageFit fs;
  const LogisticFit ps = fit_logistic(data.x, data.d);
  fs.append("propensity", ps.coef, ps.phi);
  fs.logit_iterations = ps.iterations;
  fs.logit_grad_norm = ps.grad_norm;
  const Vector controls = Vector::Ones(data.size()) - data.d;
  const OlsFit nu1 = fit_ols_subsample(data.x, data.y, data.d);
  fs.append("outcome_treated", nu1.coef, nu1.phi);
  const OlsFit nu0 = fit_ols_subsample(data.x, data.y, controls);
  fs.append("outcome_control", nu0.coef, nu0.phi);
  return fs;
}

namespace {

struct Propensity {
  Vector p;
  Vector one_m_p;
};

Propensity propensity(const Matrix& x, const Vector& coef) {
  const Vector eta = x * coef;
  Propensity out{Vector(eta.size()), Vector(eta.size())};
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out.p[i] = logistic(eta[i]);
    out.one_m_p[i] = logistic(-eta[i]);
  }
  return out;
}

// Builds the three components of an AIPW contrast of a response r between the
// arms of a binary variable s, with parameter blocks starting at the given
// offsets of gamma.
std::vector<MomentComponent> aipw_components(std::shared_ptr<const Matrix> x,
                                             std::shared_ptr<const Vector> r,
                                             std::shared_ptr<const Vector> s,
                                             Eigen::Index ps_offset, Eigen::Index arm1_offset,
                                             Eigen::Index arm0_offset, const std::string& tag) {
  const auto p = x->cols();
  MomentComponent regression;
  regression.label = tag + ":regression";
  regression.trivial_denominator = true;
  regression.evaluate = [=](const Vector& g) {
    MomentValues v;
    v.A = Vector::Ones(x->rows());
    v.B = *x * (g.segment(arm1_offset, p) - g.segment(arm0_offset, p));
    return v;
  };

  MomentComponent treated;
  treated.label = tag + ":treated";
  treated.evaluate = [=](const Vector& g) {
    const Propensity ps = propensity(*x, g.segment(ps_offset, p));
    MomentValues v;
    v.A = ps.p;
    v.B = s->cwiseProduct(*r - *x * g.segment(arm1_offset, p));
    return v;
  };

  MomentComponent control;
  control.label = tag + ":control";
  control.evaluate = [=](const Vector& g) {
    const Propensity ps = propensity(*x, g.segment(ps_offset, p));
    MomentValues v;
    v.A = ps.one_m_p;
    v.B = (Vector::Ones(x->rows()) - *s).cwiseProduct(*r - *x * g.segment(arm0_offset, p));
    return v;
  };
  return {regression, treated, control};
}

}  // namespace

EstimandSpec ate_spec(const AteSample& data) {
  const auto p = data.x.cols();
  auto x = std::make_shared<const Matrix>(data.x);
  auto y = std::make_shared<const Vector>(data.y);
  auto d = std::make_shared<const Vector>(data.d);
  EstimandSpec spec;
  spec.components = aipw_components(x, y, d, 0, p, 2 * p, "y");
  spec.combination = ate_combination();
  return spec;
}

EstimateResult ate_estimate(const AteSample& data, const TrimConfig& cfg, const SmoothingOptions& opts) {
  data.validate();
  cfg.validate();
  const FirstStageFit fs = ate_first_stage(data);
  return estimate_generic("ate", ate_spec(data), fs, cfg, opts);
}

FirstStageFit late_first_stage(const LateSample& data) {
  FirstStageFit fs;
  const LogisticFit ps = fit_logistic(data.x, data.z);
  fs.append("instrument_propensity", ps.coef, ps.phi);
  fs.logit_iterations = ps.iterations;
  fs.logit_grad_norm = ps.grad_norm;
  const Vector z0 = Vector::Ones(data.size()) - data.z;
  const OlsFit nu1 = fit_ols_subsample(data.x, data.y, data.z);
  fs.append("outcome_z1", nu1.coef, nu1.phi);
  const OlsFit nu0 = fit_ols_subsample(data.x, data.y, z0);
  fs.append("outcome_z0", nu0.coef, nu0.phi);
  const OlsFit mu1 = fit_ols_subsample(data.x, data.d, data.z);
  fs.append("treatment_z1", mu1.coef, mu1.phi);
  const OlsFit mu0 = fit_ols_subsample(data.x, data.d, z0);
  fs.append("treatment_z0", mu0.coef, mu0.phi);
  return fs;
}

EstimandSpec late_spec(const LateSample& data) {
  const auto p = data.x.cols();
  auto x = std::make_shared<const Matrix>(data.x);
  auto y = std::make_shared<const Vector>(data.y);
  auto d = std::make_shared<const Vector>(data.d);
  auto z = std::make_shared<const Vector>(data.z);
  EstimandSpec spec;
  spec.components = aipw_components(x, y, z, 0, p, 2 * p, "y");
  auto den = aipw_components(x, d, z, 0, 3 * p, 4 * p, "d");
  spec.components.insert(spec.components.end(), den.begin(), den.end());
  spec.combination = late_combination();
  return spec;
}

EstimateResult late_estimate(const LateSample& data, const TrimConfig& cfg, const SmoothingOptions& opts) {
  data.validate();
  cfg.validate();
  const FirstStageFit fs = late_first_stage(data);
  const EstimandSpec spec = late_spec(data);

  // First-stage strength is checked on the trimmed, corrected moments before
  // the ratio is formed.
  double denominator = 0.0;
  for (int l = 3; l < 6; ++l) {
    const double a = alpha_hat(spec.components[l], fs.gamma, cfg).value;
    denominator += (l == 5) ? -a : a;
  }
  if (!(std::abs(denominator) > kMinLateDenominator)) {
    fail(ErrorKind::WeakInstrument,
         "late: estimated complier share " + std::to_string(denominator) + " is within 0.01 of zero");
  }

  EstimateResult res = estimate_generic("late", spec, fs, cfg, opts);
  res.se_experimental = true;
  return res;
}

}  // namespace trimdr
