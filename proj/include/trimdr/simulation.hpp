#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trimdr/did.hpp"

namespace trimdr {

/// One of the three simulation designs. dgp 1: both working models correct;
/// dgp 2: propensity generated from the raw t variates (misspecified);
/// dgp 3: outcome generated from the raw t variates (misspecified).
struct DgpConfig {
  int dgp = 1;
  int df = 30;
  int n = 500;
  std::array<double, 4> scale{};  // sqrt(Var(Z~_j))

  void validate() const;
};

/// sqrt of the variances of X1, X1^2 - X2^2, X3^3, X4^3 for i.i.d. t(df)
/// components; all four have mean zero. Requires df > 6.
std::array<double, 4> standardization_constants(int df);

DgpConfig make_dgp(int dgp, int df, int n);

struct GeneratedSample {
  DidSample sample;  // covariates (1, Z1..Z4)
  Matrix raw;        // n x 4 raw t variates
  Vector y1_treated;  // Y1(1)
  Vector y1_control;  // Y1(0)
};

/// Per observation the stream is consumed as X1..X4, U, eps0, eps1(0),
/// eps1(1), then the upsilon noise.
GeneratedSample generate_detailed(const DgpConfig& cfg, RngStream& rng);
DidSample generate(const DgpConfig& cfg, RngStream& rng);

struct Method {
  std::string name;
  DidOptions options;
};

/// CON (h = 0) and NEW (h = 0.01, K = k = 3).
std::vector<Method> default_methods();

struct ReplicationRecord {
  bool ok = false;
  double theta = 0.0;
  double se = 0.0;
  int trimmed = 0;
  std::string error;  // error kind when !ok
};

struct MethodSummary {
  std::string name;
  TrimConfig trim;
  int succeeded = 0;
  int failed = 0;
  std::map<std::string, int> failure_kinds;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double mean_se = 0.0;
  double mean_trimmed = 0.0;
};

struct SimulationReport {
  DgpConfig dgp;
  int reps = 0;
  std::uint64_t seed = 0;
  double true_att = 0.0;
  std::vector<MethodSummary> methods;
  std::vector<std::vector<ReplicationRecord>> records;  // [method][rep]
  double runtime_seconds = 0.0;  // not part of serialized output
};

/// Worker count from TRIMDR_THREADS, falling back to the hardware.
int default_thread_count();

/// Replication r draws from RngStream(seed, r); failures are counted and
/// excluded from the aggregates. Output is independent of the thread count.
SimulationReport run_study(const DgpConfig& dgp, int reps, const std::vector<Method>& methods,
                           std::uint64_t seed, int threads = 0);

/// Aggregates with 1/N moments so that rmse^2 = bias^2 + sd^2.
MethodSummary summarize(const std::string& name, const TrimConfig& trim,
                        const std::vector<ReplicationRecord>& records, double truth = 0.0);

}  // namespace trimdr
