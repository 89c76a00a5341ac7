#pragma once

#include <iosfwd>

#include "json.hpp"

#include "homog_app/config.hpp"

namespace homog::app {

inline constexpr int kRecordSchemaVersion = 1;

/// Finite-element benchmark for both forms on the configured material:
/// solves, writes run.json and the nodal solutions into config.out and
/// returns the record. Progress lines go to `log`.
nlohmann::json run_fem(const RunConfig& config, std::ostream& log);

/// Trains the selected forms, computes quick estimates and guaranteed
/// bounds on the piecewise reference mesh, writes run.json, curve.csv,
/// the nodal fields and the parameters, and returns the record.
nlohmann::json run_train(const RunConfig& config, std::ostream& log);

/// True when any trained form stopped on a non-finite value.
bool record_aborted(const nlohmann::json& record);

/// The record without wall-clock and output-location fields, for
/// comparing two runs of the same config.
nlohmann::json comparable_record(const nlohmann::json& record);

/// Pretty-printed JSON with a trailing newline; doubles round-trip exactly.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace homog::app
