#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hardylab/config.hpp"
#include "hardylab/eigensolver.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/spectral.hpp"

namespace hardylab::report {

using json = nlohmann::json;

inline constexpr const char* kSchemaName = "hardylab.report";
inline constexpr int kSchemaVersion = 1;

json to_json(const geometry::Point& p, int dimension);
json to_json(const geometry::DistanceEval& e, int dimension);
json to_json(const geometry::SuperharmonicityReport& r, int dimension);
json to_json(const hardy::HardyConstants& c);
json to_json(const hardy::HardyBoundSpec& s);
json to_json(const hardy::HardyCertificate& c);
json to_json(const eigen::SpectralReport& r);
json to_json(const eigen::ConvergenceTable& t);
json to_json(const spectral::PerssonSequence& s);
json to_json(const spectral::CriterionReport& r, int dimension);
json to_json(const spectral::DiagnosticReport& r, int dimension);

/// Every effective setting, defaults included.
json to_json(const config::RunConfig& cfg);

/// UTC, ISO 8601, second resolution.
std::string timestamp();

/// Report envelope. `result` is null for error reports.
json envelope(const std::string& command, const std::string& status, int exit_code, bool dry_run,
              const json& config, const json& result);
json error_report(const std::string& command, const std::string& code, const std::string& message,
                  const json& config = nullptr);

/// Validates against the subset of JSON Schema used by docs/report.schema.json:
/// type, enum, const, required, properties, additionalProperties (boolean),
/// items, minimum, maximum, minItems, allOf, if/then and local $ref. Returns one
/// message per violation, each prefixed with its JSON pointer.
std::vector<std::string> validate(const json& instance, const json& schema);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content);

/// printf("%.17g") of a double.
std::string real(double v);

} // namespace hardylab::report
