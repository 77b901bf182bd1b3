#include "trimdr/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace trimdr {

std::array<double, 4> standardization_constants(int df) {
  require(df > 6, "standardization_constants: need df > 6 for finite sixth moments");
  const double v = df;
  const double m2 = v / (v - 2.0);
  const double m4 = 3.0 * v * v / ((v - 2.0) * (v - 4.0));
  const double m6 = 15.0 * v * v * v / ((v - 2.0) * (v - 4.0) * (v - 6.0));
  // X1^2 - X2^2 has variance 2 Var(X^2); X^3 has variance E[X^6].
  return {std::sqrt(m2), std::sqrt(2.0 * (m4 - m2 * m2)), std::sqrt(m6), std::sqrt(m6)};
}

void DgpConfig::validate() const {
  if (dgp < 1 || dgp > 3) fail(ErrorKind::ConfigError, "dgp must be 1, 2 or 3");
  if (df <= 6) fail(ErrorKind::ConfigError, "df must exceed 6");
  if (n < 2) fail(ErrorKind::ConfigError, "n must be at least 2");
  for (double s : scale) {
    if (!(s > 0.0)) fail(ErrorKind::ConfigError, "standardization constants must be positive");
  }
}

DgpConfig make_dgp(int dgp, int df, int n) {
  if (df <= 6) fail(ErrorKind::ConfigError, "df must exceed 6");
  DgpConfig cfg{dgp, df, n, standardization_constants(df)};
  cfg.validate();
  return cfg;
}

namespace {

double f_reg(const double* w) { return 1.0 + w[0] + w[1] + w[2] + w[3]; }
double f_ps(const double* w) { return w[0] + w[1] + w[2] + w[3]; }

}  // namespace

GeneratedSample generate_detailed(const DgpConfig& cfg, RngStream& rng) {
  cfg.validate();
  const int n = cfg.n;
  GeneratedSample out;
  DidSample& s = out.sample;
  s.y0.resize(n);
  s.y1.resize(n);
  s.d.resize(n);
  s.x.resize(n, 5);
  out.raw.resize(n, 4);
  out.y1_treated.resize(n);
  out.y1_control.resize(n);

  for (int i = 0; i < n; ++i) {
    double x[4];
    for (double& xi : x) xi = rng.student_t(cfg.df);
    const double u = rng.uniform();
    const double eps0 = rng.normal();
    const double eps1_control = rng.normal();
    const double eps1_treated = rng.normal();
    const double upsilon_noise = rng.normal();

    const double z[4] = {x[0] / cfg.scale[0], (x[0] * x[0] - x[1] * x[1]) / cfg.scale[1],
                         x[2] * x[2] * x[2] / cfg.scale[2], x[3] * x[3] * x[3] / cfg.scale[3]};
    const double* ps_arg = (cfg.dgp == 2) ? x : z;
    const double* reg_arg = (cfg.dgp == 3) ? x : z;

    const double score = logistic(f_ps(ps_arg));
    const double d = (score >= u) ? 1.0 : 0.0;
    const double reg = f_reg(reg_arg);
    const double upsilon = d * reg + upsilon_noise;

    s.y0[i] = reg + upsilon + eps0;
    out.y1_control[i] = 2.0 * reg + upsilon + eps1_control;
    out.y1_treated[i] = 2.0 * reg + upsilon + eps1_treated;
    s.y1[i] = d * out.y1_treated[i] + (1.0 - d) * out.y1_control[i];
    s.d[i] = d;
    s.x(i, 0) = 1.0;
    for (int j = 0; j < 4; ++j) {
      s.x(i, j + 1) = z[j];
      out.raw(i, j) = x[j];
    }
  }
  return out;
}

DidSample generate(const DgpConfig& cfg, RngStream& rng) { return generate_detailed(cfg, rng).sample; }

std::vector<Method> default_methods() {
  Method con;
  con.name = "CON";
  con.options.trim = TrimConfig{0.0, 3, 3};
  Method nu;
  nu.name = "NEW";
  nu.options.trim = TrimConfig{0.01, 3, 3};
  return {con, nu};
}

int default_thread_count() {
  if (const char* env = std::getenv("TRIMDR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

MethodSummary summarize(const std::string& name, const TrimConfig& trim,
                        const std::vector<ReplicationRecord>& records, double truth) {
  MethodSummary m;
  m.name = name;
  m.trim = trim;
  double sum = 0.0;
  double sum_se = 0.0;
  double sum_trim = 0.0;
  int covered = 0;
  for (const auto& r : records) {
    if (!r.ok) {
      ++m.failed;
      ++m.failure_kinds[r.error];
      continue;
    }
    ++m.succeeded;
    sum += r.theta;
    sum_se += r.se;
    sum_trim += r.trimmed;
    if (std::abs(r.theta - truth) <= 1.96 * r.se) ++covered;
  }
  if (m.succeeded == 0) return m;
  const double count = m.succeeded;
  const double mean = sum / count;
  double ss = 0.0;
  for (const auto& r : records) {
    if (r.ok) ss += (r.theta - mean) * (r.theta - mean);
  }
  m.bias = mean - truth;
  m.sd = std::sqrt(ss / count);
  m.rmse = std::sqrt(m.bias * m.bias + m.sd * m.sd);
  m.coverage = covered / count;
  m.mean_se = sum_se / count;
  m.mean_trimmed = sum_trim / count;
  return m;
}

SimulationReport run_study(const DgpConfig& dgp, int reps, const std::vector<Method>& methods,
                           std::uint64_t seed, int threads) {
  dgp.validate();
  if (reps < 1) fail(ErrorKind::ConfigError, "reps must be at least 1");
  if (methods.empty()) fail(ErrorKind::ConfigError, "at least one method is required");
  for (const auto& m : methods) m.options.trim.validate();

  const auto start = std::chrono::steady_clock::now();
  SimulationReport report;
  report.dgp = dgp;
  report.reps = reps;
  report.seed = seed;
  report.records.assign(methods.size(), std::vector<ReplicationRecord>(reps));

  auto run_one = [&](int r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    const DidSample sample = generate(dgp, rng);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      ReplicationRecord rec;
      try {
        const DidEstimate est = did_estimate(sample, methods[m].options);
        rec.ok = std::isfinite(est.theta) && std::isfinite(est.se);
        rec.theta = est.theta;
        rec.se = est.se;
        rec.trimmed = est.trimmed_count();
        if (!rec.ok) rec.error = "NonFinite";
      } catch (const Error& e) {
        rec.error = std::string(error_kind_name(e.kind()));
      } catch (const std::exception&) {
        rec.error = "Unknown";
      }
      report.records[m][r] = rec;
    }
  };

  const int workers = std::max(1, std::min(threads > 0 ? threads : default_thread_count(), reps));
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < reps; r = next++) run_one(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    report.methods.push_back(
        summarize(methods[m].name, methods[m].options.trim, report.records[m], report.true_att));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace trimdr
