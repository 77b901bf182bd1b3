#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "trimdr/did.hpp"
#include "trimdr/estimands.hpp"
#include "trimdr/simulation.hpp"

namespace trimdr {

inline constexpr int kSchemaVersion = 1;

enum class Estimand { Did, Ate, Late };

Estimand parse_estimand(const std::string& name);
std::string estimand_name(Estimand e);

using Sample = std::variant<DidSample, AteSample, LateSample>;

struct LoadedSample {
  Sample sample;
  Eigen::Index rows = 0;
  std::vector<std::string> columns;  // header order as read
};

/// Header row required. Schemas (covariates x1..xp, p may be zero):
///   did: y0,y1,d,x1..xp   ate: y,d,x1..xp   late: y,d,z,x1..xp
/// An intercept column is prepended to the covariates. Violations raise
/// SchemaError naming the line and column.
LoadedSample read_csv(std::istream& in, Estimand estimand, const std::string& source = "<stream>");
LoadedSample load_csv(const std::string& path, Estimand estimand);

/// Writes a DiD sample in the did schema, dropping the intercept column.
/// Values are printed with 17 significant digits.
void write_did_csv(std::ostream& out, const DidSample& sample);
void write_did_csv(const std::string& path, const DidSample& sample);

nlohmann::json to_json(const DidEstimate& est);
nlohmann::json to_json(const EstimateResult& est);
nlohmann::json to_json(const SimulationReport& report);
nlohmann::json to_json(const std::vector<SimulationReport>& reports);
nlohmann::json error_json(const Error& e);

/// BIAS / SD / RMSE / 95% rows, one CON/NEW column pair per design.
std::string format_table(const std::vector<SimulationReport>& reports);
std::string format_csv(const std::vector<SimulationReport>& reports);

}  // namespace trimdr
