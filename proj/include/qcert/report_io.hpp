#pragma once

#include <string>

#include <json.hpp>

#include "qcert/distances.hpp"
#include "qcert/observables.hpp"
#include "qcert/simulate.hpp"

namespace qcert {

// JSON views of the report types.  Every top-level report embeds the config
// it was produced from, the seed, and the library version, so re-running the
// embedded config reproduces the file bit-exactly.

nlohmann::json to_json(const QuantumDivergenceReport& rep);
nlohmann::json to_json(const ClassicalDivergenceReport& rep);
nlohmann::json to_json(const MomentReport& rep);
nlohmann::json to_json(const TestDecision& decision);
nlohmann::json to_json(const PowerReport& rep);

// Wraps a payload with {"config": ..., "version": ...}.
nlohmann::json wrap_report(const nlohmann::json& config, const nlohmann::json& payload);

// Structural validation mirroring docs/report.schema.json; throws
// std::invalid_argument naming the offending field.
void validate_report_json(const nlohmann::json& report);

// CSV row schema for power sweeps (documented in the README):
// kind,d,T,theta,trials,seed,null_rate,null_low,null_high,far_rate,far_low,far_high,far_mu
std::string power_csv_header();
std::string power_csv_row(ObservableTag tag, int d, long T, double theta, long trials,
                          std::uint64_t seed, const PowerReport& null_rep,
                          const PowerReport& far_rep, double far_mu);

// Round-trip float formatting (17 significant digits).
std::string format_double(double v);

} // namespace qcert
