#include "trimdr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace trimdr {

using nlohmann::json;

Estimand parse_estimand(const std::string& name) {
  if (name == "did") return Estimand::Did;
  if (name == "ate") return Estimand::Ate;
  if (name == "late") return Estimand::Late;
  fail(ErrorKind::ConfigError, "unknown estimand '" + name + "' (expected did, ate or late)");
}

std::string estimand_name(Estimand e) {
  switch (e) {
    case Estimand::Did: return "did";
    case Estimand::Ate: return "ate";
    case Estimand::Late: return "late";
  }
  return "did";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(const std::string& source, long line, const std::string& column) {
  std::ostringstream s;
  s << source << ": line " << line << ", column '" << column << "'";
  return s.str();
}

double parse_number(const std::string& cell, const std::string& at) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(ErrorKind::SchemaError, at + ": '" + cell + "' is not a finite number");
  }
  return v;
}

std::vector<std::string> required_columns(Estimand e) {
  switch (e) {
    case Estimand::Did: return {"y0", "y1", "d"};
    case Estimand::Ate: return {"y", "d"};
    case Estimand::Late: return {"y", "d", "z"};
  }
  return {};
}

bool is_covariate(const std::string& name, int& index) {
  if (name.size() < 2 || name[0] != 'x') return false;
  int v = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (ec != std::errc() || ptr != name.data() + name.size() || v < 1) return false;
  index = v;
  return true;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LoadedSample read_csv(std::istream& in, Estimand estimand, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    fail(ErrorKind::SchemaError, source + ": missing header row");
  }
  LoadedSample out;
  out.columns = split(line);

  std::map<std::string, std::size_t> position;
  std::map<int, std::size_t> covariates;
  for (std::size_t c = 0; c < out.columns.size(); ++c) {
    const std::string& name = out.columns[c];
    if (!position.emplace(name, c).second) {
      fail(ErrorKind::SchemaError, source + ": duplicate column '" + name + "'");
    }
    int idx = 0;
    if (is_covariate(name, idx)) covariates[idx] = c;
  }
  const auto required = required_columns(estimand);
  for (const auto& name : required) {
    if (!position.count(name)) {
      fail(ErrorKind::SchemaError, source + ": missing column '" + name + "' for estimand " +
                                       estimand_name(estimand));
    }
  }
  for (const auto& name : out.columns) {
    int idx = 0;
    const bool known = is_covariate(name, idx) ||
                       std::find(required.begin(), required.end(), name) != required.end();
    if (!known) fail(ErrorKind::SchemaError, source + ": unexpected column '" + name + "'");
  }
  int expect = 1;
  for (const auto& [idx, col] : covariates) {
    if (idx != expect++) {
      fail(ErrorKind::SchemaError, source + ": covariate columns must be x1..xp without gaps");
    }
  }

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != out.columns.size()) {
      std::ostringstream msg;
      msg << source << ": line " << line_no << " has " << cells.size() << " fields, expected "
          << out.columns.size();
      fail(ErrorKind::SchemaError, msg.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = parse_number(cells[c], where(source, line_no, out.columns[c]));
    }
    for (const char* binary : {"d", "z"}) {
      const auto it = position.find(binary);
      if (it == position.end()) continue;
      const double v = row[it->second];
      if (v != 0.0 && v != 1.0) {
        fail(ErrorKind::SchemaError,
             where(source, line_no, binary) + ": value " + cells[it->second] + " is not 0 or 1");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::SchemaError, source + ": no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(covariates.size());
  out.rows = n;
  auto column = [&](const std::string& name) {
    Vector v(n);
    const std::size_t c = position.at(name);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rows[i][c];
    return v;
  };
  Matrix x(n, p + 1);
  x.col(0).setOnes();
  for (const auto& [idx, col] : covariates) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, idx) = rows[i][col];
  }

  switch (estimand) {
    case Estimand::Did:
      out.sample = DidSample{column("y0"), column("y1"), column("d"), x};
      break;
    case Estimand::Ate:
      out.sample = AteSample{column("y"), column("d"), x};
      break;
    case Estimand::Late:
      out.sample = LateSample{column("y"), column("d"), column("z"), x};
      break;
  }
  return out;
}

LoadedSample load_csv(const std::string& path, Estimand estimand) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "' for reading");
  return read_csv(in, estimand, path);
}

void write_did_csv(std::ostream& out, const DidSample& sample) {
  out << "y0,y1,d";
  for (Eigen::Index j = 1; j < sample.x.cols(); ++j) out << ",x" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    out << fmt17(sample.y0[i]) << ',' << fmt17(sample.y1[i]) << ',' << fmt17(sample.d[i]);
    for (Eigen::Index j = 1; j < sample.x.cols(); ++j) out << ',' << fmt17(sample.x(i, j));
    out << '\n';
  }
}

void write_did_csv(const std::string& path, const DidSample& sample) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  write_did_csv(out, sample);
}

namespace {

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json ci_fields(json j, double theta, double se) {
  j["theta_hat"] = theta;
  j["se"] = se;
  j["ci95_lo"] = theta - 1.96 * se;
  j["ci95_hi"] = theta + 1.96 * se;
  return j;
}

}  // namespace

json to_json(const DidEstimate& est) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["estimand"] = "did";
  j = ci_fields(std::move(j), est.theta, est.se);
  j["n"] = est.n;
  j["trimmed_count"] = est.trimmed_count();
  j["h"] = est.trim.h;
  j["K"] = est.trim.K;
  j["k"] = est.trim.k;
  j["method_flags"] = {{"literal_alpha0", est.literal_alpha0},
                       {"kernel", est.kernel},
                       {"dalpha_method", est.dalpha2_method},
                       {"se_experimental", false}};
  json diag;
  diag["mean_d"] = est.mean_d;
  diag["alpha2"] = est.alpha2.value;
  diag["alpha2_untrimmed_part"] = est.alpha2.untrimmed_part;
  diag["alpha2_correction"] = est.alpha2.correction_part;
  diag["alpha2_no_trim"] = est.alpha2_untrimmed;
  diag["bandwidth"] = est.bandwidth;
  diag["gram_condition"] = est.alpha2.sieve ? json(est.alpha2.sieve->gram_condition) : json(nullptr);
  diag["logit_iterations"] = est.first_stage.logit_iterations;
  diag["logit_grad_norm"] = est.first_stage.logit_grad_norm;
  diag["gamma_propensity"] = vector_json(est.first_stage.segment(est.first_stage.gamma, "propensity"));
  diag["gamma_outcome"] = vector_json(est.first_stage.segment(est.first_stage.gamma, "outcome"));
  diag["min_one_minus_p"] = est.alpha2.values.A.minCoeff();
  j["diagnostics"] = diag;
  return j;
}

json to_json(const EstimateResult& est) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["estimand"] = est.estimand;
  j = ci_fields(std::move(j), est.theta, est.se);
  j["n"] = est.n;
  j["trimmed_count"] = est.trimmed_count();
  j["h"] = est.trim.h;
  j["K"] = est.trim.K;
  j["k"] = est.trim.k;
  j["method_flags"] = {{"literal_alpha0", false}, {"se_experimental", est.se_experimental}};
  json comps = json::array();
  for (const auto& c : est.components) {
    json cj{{"label", c.label},
            {"alpha", c.alpha},
            {"trimmed_count", c.trimmed_count},
            {"dalpha_method", c.dalpha_method}};
    cj["gram_condition"] = c.gram_condition ? json(*c.gram_condition) : json(nullptr);
    cj["bandwidth"] = c.bandwidth ? json(*c.bandwidth) : json(nullptr);
    comps.push_back(cj);
  }
  j["diagnostics"] = {{"components", comps},
                      {"logit_iterations", est.first_stage.logit_iterations},
                      {"logit_grad_norm", est.first_stage.logit_grad_norm}};
  return j;
}

json to_json(const SimulationReport& report) {
  json j;
  j["dgp"] = report.dgp.dgp;
  j["df"] = report.dgp.df;
  j["n"] = report.dgp.n;
  j["reps"] = report.reps;
  j["seed"] = report.seed;
  j["true_att"] = report.true_att;
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back({{"method", m.name},
                       {"h", m.trim.h},
                       {"K", m.trim.K},
                       {"k", m.trim.k},
                       {"bias", m.bias},
                       {"sd", m.sd},
                       {"rmse", m.rmse},
                       {"coverage95", m.coverage},
                       {"mean_se", m.mean_se},
                       {"mean_trimmed", m.mean_trimmed},
                       {"succeeded", m.succeeded},
                       {"failed", m.failed},
                       {"failures", m.failure_kinds}});
  }
  j["methods"] = methods;
  return j;
}

json to_json(const std::vector<SimulationReport>& reports) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json studies = json::array();
  for (const auto& r : reports) studies.push_back(to_json(r));
  j["studies"] = studies;
  return j;
}

json error_json(const Error& e) {
  return {{"schema_version", kSchemaVersion},
          {"error", std::string(error_kind_name(e.kind()))},
          {"message", e.what()}};
}

std::string format_table(const std::vector<SimulationReport>& reports) {
  std::ostringstream out;
  if (reports.empty()) return {};
  const auto& first = reports.front();
  out << "df=" << first.dgp.df << ", n=" << first.dgp.n << ", reps=" << first.reps
      << ", seed=" << first.seed << '\n';

  char buf[64];
  out << "      ";
  for (const auto& r : reports) {
    const int width = static_cast<int>(r.methods.size()) * 9;
    std::snprintf(buf, sizeof buf, "  %-*s", width - 1, ("DGP" + std::to_string(r.dgp.dgp)).c_str());
    out << buf;
  }
  out << "\n      ";
  for (const auto& r : reports) {
    out << " ";
    for (const auto& m : r.methods) {
      std::snprintf(buf, sizeof buf, "%9s", m.name.c_str());
      out << buf;
    }
  }
  out << '\n';

  struct Row {
    const char* label;
    double MethodSummary::*field;
  };
  const Row rows[] = {{"BIAS", &MethodSummary::bias},
                      {"SD", &MethodSummary::sd},
                      {"RMSE", &MethodSummary::rmse},
                      {"95%", &MethodSummary::coverage}};
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-6s", row.label);
    out << buf;
    for (const auto& r : reports) {
      out << " ";
      for (const auto& m : r.methods) {
        std::snprintf(buf, sizeof buf, "%9.3f", m.*(row.field));
        out << buf;
      }
    }
    out << '\n';
  }
  out << "failed";
  for (const auto& r : reports) {
    out << " ";
    for (const auto& m : r.methods) {
      std::snprintf(buf, sizeof buf, "%9d", m.failed);
      out << buf;
    }
  }
  out << '\n';
  return out.str();
}

std::string format_csv(const std::vector<SimulationReport>& reports) {
  std::ostringstream out;
  out << "dgp,df,n,reps,seed,method,h,K,k,bias,sd,rmse,coverage95,mean_se,succeeded,failed\n";
  for (const auto& r : reports) {
    for (const auto& m : r.methods) {
      out << r.dgp.dgp << ',' << r.dgp.df << ',' << r.dgp.n << ',' << r.reps << ',' << r.seed << ','
          << m.name << ',' << fmt17(m.trim.h) << ',' << m.trim.K << ',' << m.trim.k << ','
          << fmt17(m.bias) << ',' << fmt17(m.sd) << ',' << fmt17(m.rmse) << ','
          << fmt17(m.coverage) << ',' << fmt17(m.mean_se) << ',' << m.succeeded << ','
          << m.failed << '\n';
    }
  }
  return out.str();
}

}  // namespace trimdr
