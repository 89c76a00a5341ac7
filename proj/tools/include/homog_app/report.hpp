#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace homog::app {

/// One line of the consolidated table. Errors are percentages relative to
/// the exact reference of the record's phases; missing values stay empty.
struct ReportRow {
    std::string label;
    std::string method;
    std::string form;
    std::string material;
    std::optional<double> epsilon;
    long long param_count = 0;
    std::optional<long long> n_test;
    long long epochs = 0;
    std::uint64_t seed = 0;
    std::optional<double> primal_estimate_pct;
    std::optional<double> dual_estimate_pct;
    std::optional<double> upper_bound_pct;
    std::optional<double> lower_bound_pct;
    std::optional<double> gap_pct;
    bool suspected_failure = false;
    bool best_in_group = false;
    std::string source;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Builds a row from a run record. Throws ConfigError when the record does
/// not validate against the run-record schema.
ReportRow row_from_record(const nlohmann::json& record, const std::string& source);

struct ReportInput {
    std::vector<ReportRow> rows;
    std::vector<std::string> warnings;  ///< one per skipped input
};

/// Each input may be a run directory, a run.json file or a CSV written by
/// format_report_csv(). Missing or corrupt inputs are skipped with a warning.
ReportInput collect_rows(const std::vector<std::filesystem::path>& inputs);

/// Within each method, flags the row with the narrowest guaranteed bound
/// interval (upper - lower error), or the smallest largest-magnitude
/// estimate error when no row of the method has both bounds.
void mark_best_in_group(std::vector<ReportRow>& rows);

const std::vector<std::string>& report_columns();
std::string format_report_csv(const std::vector<ReportRow>& rows);
/// Inverse of format_report_csv(); throws ConfigError on malformed input.
std::vector<ReportRow> parse_report_csv(const std::string& text);

}  // namespace homog::app
