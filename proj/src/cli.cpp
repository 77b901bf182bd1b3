#include "trimdr/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "trimdr/io.hpp"

namespace trimdr {

void RunConfig::validate() const {
  if (!(h >= 0.0 && h < 1.0)) fail(ErrorKind::ConfigError, "--h must lie in [0, 1)");
  if (k < 1 || K < k) fail(ErrorKind::ConfigError, "need K >= k >= 1");
  if (k > 12) fail(ErrorKind::ConfigError, "--k must not exceed 12");
  if (bandwidth && !(*bandwidth > 0.0)) fail(ErrorKind::ConfigError, "--bandwidth must be positive");
  parse_kernel(kernel);
  if (subcommand == "estimate") {
    parse_estimand(estimand);
    if (input.empty()) fail(ErrorKind::ConfigError, "--input is required");
  }
  if (subcommand == "simulate" || subcommand == "generate") {
    if (dgps.empty()) fail(ErrorKind::ConfigError, "--dgp is required");
    for (int d : dgps) {
      if (d < 1 || d > 3) fail(ErrorKind::ConfigError, "--dgp values must be 1, 2 or 3");
    }
    if (df <= 6) fail(ErrorKind::ConfigError, "--df must exceed 6");
    if (n < 10) fail(ErrorKind::ConfigError, "--n must be at least 10");
  }
  if (subcommand == "simulate" && reps < 1) fail(ErrorKind::ConfigError, "--reps must be at least 1");
  if (subcommand == "generate" && dgps.size() != 1) {
    fail(ErrorKind::ConfigError, "generate takes a single --dgp");
  }
  if (rep < 0) fail(ErrorKind::ConfigError, "--rep must be nonnegative");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
      return 2;
    case ErrorKind::SchemaError:
    case ErrorKind::IoError:
    case ErrorKind::Precondition:
      return 3;
    default:
      return 4;
  }
}

namespace {

// Writes to the configured output file, or to out when none is given.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file) fail(ErrorKind::IoError, "cannot open '" + cfg.output + "' for writing");
  file << text;
  if (!file) fail(ErrorKind::IoError, "failed writing '" + cfg.output + "'");
}

int report_error(const Error& e, std::ostream& err) {
  err << error_json(e).dump() << '\n';
  return exit_code_for(e.kind());
}

TrimConfig trim_config(const RunConfig& cfg) { return TrimConfig{cfg.h, cfg.K, cfg.k}; }

}  // namespace

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const Estimand estimand = parse_estimand(cfg.estimand);
    const LoadedSample loaded = load_csv(cfg.input, estimand);
    const Kernel kernel = parse_kernel(cfg.kernel);

    nlohmann::json record;
    if (estimand == Estimand::Did) {
      DidOptions opts;
      opts.trim = trim_config(cfg);
      opts.kernel = kernel;
      opts.bandwidth = cfg.bandwidth;
      opts.literal_alpha0 = cfg.literal_alpha0;
      record = to_json(did_estimate(std::get<DidSample>(loaded.sample), opts));
    } else {
      if (cfg.literal_alpha0) {
        fail(ErrorKind::ConfigError, "--literal-alpha0 only applies to the did estimand");
      }
      SmoothingOptions opts;
      opts.kernel = kernel;
      opts.bandwidth = cfg.bandwidth;
      const EstimateResult res = estimand == Estimand::Ate
                                     ? ate_estimate(std::get<AteSample>(loaded.sample), trim_config(cfg), opts)
                                     : late_estimate(std::get<LateSample>(loaded.sample), trim_config(cfg), opts);
      record = to_json(res);
    }
    record["diagnostics"]["input_rows"] = loaded.rows;
    record["diagnostics"]["input_columns"] = loaded.columns;
    emit(cfg, out, record.dump(2) + "\n");
    return 0;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    std::vector<Method> methods = default_methods();
    for (auto& m : methods) {
      m.options.kernel = parse_kernel(cfg.kernel);
      m.options.bandwidth = cfg.bandwidth;
      m.options.literal_alpha0 = cfg.literal_alpha0;
      m.options.trim.K = cfg.K;
      m.options.trim.k = cfg.k;
    }
    methods[1].options.trim.h = cfg.h;

    std::vector<SimulationReport> reports;
    double runtime = 0.0;
    for (int dgp : cfg.dgps) {
      reports.push_back(run_study(make_dgp(dgp, cfg.df, cfg.n), cfg.reps, methods, cfg.seed, cfg.threads));
      runtime += reports.back().runtime_seconds;
    }

    std::string text;
    switch (cfg.format) {
      case OutputFormat::Json: text = to_json(reports).dump(2) + "\n"; break;
      case OutputFormat::Table: text = format_table(reports); break;
      case OutputFormat::Csv: text = format_csv(reports); break;
    }
    emit(cfg, out, text);
    err << "simulate: " << cfg.dgps.size() << " design(s), " << cfg.reps << " replications in "
        << runtime << " s\n";
    return 0;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(cfg.rep));
    const DidSample sample = generate(make_dgp(cfg.dgps.front(), cfg.df, cfg.n), rng);
    std::ostringstream text;
    write_did_csv(text, sample);
    emit(cfg, out, text.str());
    return 0;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Doubly robust treatment-effect estimation with trimming-bias correction"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  RunConfig cfg;
  std::string format = "json";

  auto add_tuning = [&](CLI::App* sub) {
    sub->add_option("--h", cfg.h, "Trimming threshold (0 disables trimming)");
    sub->add_option("--K", cfg.K, "Sieve degree");
    sub->add_option("--k", cfg.k, "Bias-correction order");
    sub->add_option("--kernel", cfg.kernel, "gaussian or epanechnikov");
    sub->add_option("--bandwidth", cfg.bandwidth, "Kernel bandwidth (default: Silverman)");
    sub->add_flag("--literal-alpha0", cfg.literal_alpha0,
                  "Use the untrimmed alpha2 in the last influence-function term");
    sub->add_option("-o,--output", cfg.output, "Output path (default: stdout)");
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate a treatment effect from a CSV file");
  estimate->add_option("--estimand", cfg.estimand, "did, ate or late");
  estimate->add_option("-i,--input", cfg.input, "Input CSV")->required();
  add_tuning(estimate);

  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo comparison of CON and NEW");
  simulate->add_option("--dgp", cfg.dgps, "Design(s): 1, 2, 3; comma separated")->delimiter(',');
  simulate->add_option("--df", cfg.df, "Degrees of freedom of the t covariates");
  simulate->add_option("--n", cfg.n, "Sample size");
  simulate->add_option("--reps", cfg.reps, "Replications");
  simulate->add_option("--seed", cfg.seed, "Base seed");
  simulate->add_option("--threads", cfg.threads, "Worker threads (default: TRIMDR_THREADS or all cores)");
  simulate->add_option("--format", format, "json, table or csv");
  add_tuning(simulate);

  auto* gen = app.add_subcommand("generate", "Write one simulated DiD sample as CSV");
  gen->add_option("--dgp", cfg.dgps, "Design: 1, 2 or 3");
  gen->add_option("--df", cfg.df, "Degrees of freedom of the t covariates");
  gen->add_option("--n", cfg.n, "Sample size");
  gen->add_option("--seed", cfg.seed, "Base seed");
  gen->add_option("--rep", cfg.rep, "Replication (stream) index");
  gen->add_option("-o,--output", cfg.output, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << error_json(Error(ErrorKind::ConfigError, e.what())).dump() << '\n';
    return exit_code_for(ErrorKind::ConfigError);
  }

  if (format == "json") {
    cfg.format = OutputFormat::Json;
  } else if (format == "table") {
    cfg.format = OutputFormat::Table;
  } else if (format == "csv") {
    cfg.format = OutputFormat::Csv;
  } else {
    return report_error(Error(ErrorKind::ConfigError, "unknown --format '" + format + "'"), err);
  }

  if (estimate->parsed()) {
    cfg.subcommand = "estimate";
    return cmd_estimate(cfg, out, err);
  }
  if (simulate->parsed()) {
    cfg.subcommand = "simulate";
    return cmd_simulate(cfg, out, err);
  }
  cfg.subcommand = "generate";
  return cmd_generate(cfg, out, err);
}

}  // namespace trimdr
