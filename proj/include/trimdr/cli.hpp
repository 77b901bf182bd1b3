#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trimdr/error.hpp"

namespace trimdr {

enum class OutputFormat { Json, Table, Csv };

struct RunConfig {
  std::string subcommand;
  std::string estimand = "did";
  double h = 0.01;
  int K = 3;
  int k = 3;
  std::string kernel = "gaussian";
  std::optional<double> bandwidth;
  bool literal_alpha0 = false;
  std::string input;
  std::string output;  // empty: stdout
  std::uint64_t seed = 1;
  int reps = 1000;
  std::vector<int> dgps{1};
  int df = 30;
  int n = 500;
  int rep = 0;  // generate: replication (stream) index
  int threads = 0;
  OutputFormat format = OutputFormat::Json;

  void validate() const;
};

// 0 ok, 2 configuration, 3 schema or input, 4 numerical failure.
int exit_code_for(ErrorKind kind);

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace trimdr
