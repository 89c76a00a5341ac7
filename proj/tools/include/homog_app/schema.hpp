#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace homog::app {

/// The published run-record schema (schema/run_record.schema.json).
const nlohmann::json& run_record_schema();

/// Checks `value` against a JSON Schema using the keywords type, enum,
/// required, properties, additionalProperties, items, minimum and
/// exclusiveMinimum. Returns one message per violation, each prefixed by
/// the JSON pointer of the offending value; empty means valid.
std::vector<std::string> schema_violations(const nlohmann::json& value, const nlohmann::json& schema);

}  // namespace homog::app
