#include "homog_app/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "homog/cell_material.hpp"
#include "homog/error.hpp"
#include "homog_app/experiments.hpp"
#include "homog_app/schema.hpp"

namespace homog::app {

namespace {

using json = nlohmann::json;

std::optional<double> optional_number(const json& v) {
    if (v.is_number()) return v.get<double>();
    return std::nullopt;
}

std::optional<double> percent(const json& v, double reference) {
    const auto x = optional_number(v);
    if (!x) return std::nullopt;
    return 100.0 * (*x - reference) / reference;
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

// Splits one CSV record starting at `pos`; advances `pos` past the line end.
std::vector<std::string> read_record(const std::string& text, std::size_t& pos) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    while (pos < text.size()) {
        const char c = text[pos++];
        if (quoted) {
            if (c == '"') {
                if (pos < text.size() && text[pos] == '"') {
                    fields.back() += '"';
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    if (quoted) throw ConfigError("unterminated quoted CSV field");
    return fields;
}

double parse_number(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad number '" + s + "' in report CSV");
    return v;
}

long long parse_count(const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad integer '" + s + "' in report CSV");
    return v;
}

std::uint64_t parse_unsigned(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad seed '" + s + "' in report CSV");
    return v;
}

std::optional<double> parse_optional(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return parse_number(s);
}

bool parse_flag(const std::string& s) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw ConfigError("bad flag '" + s + "' in report CSV");
}

std::string make_label(const ReportRow& r) {
    std::string label = r.method + " " + std::to_string(r.param_count) + "p";
    if (r.epsilon) label += " eps=" + format_number(*r.epsilon);
    else label += " " + r.material;
    if (r.n_test) label += " Nt=" + std::to_string(*r.n_test);
    if (r.form != "both") label += " " + r.form;
    return label;
}

}  // namespace

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> columns = {
        "label",           "method",          "form",           "material",       "epsilon",
        "param_count",     "n_test",          "epochs",         "seed",           "primal_estimate_err_pct",
        "dual_estimate_err_pct", "upper_bound_err_pct", "lower_bound_err_pct", "gap_pct", "suspected_failure",
        "best_in_group",   "source",
    };
    return columns;
}

ReportRow row_from_record(const json& record, const std::string& source) {
    const auto problems = schema_violations(record, run_record_schema());
    if (!problems.empty()) throw ConfigError("record does not match the schema: " + problems.front());

    const json& cfg = record["config"];
    const PhasePair phases{cfg["material"]["gamma_mat"].get<double>(), cfg["material"]["gamma_inc"].get<double>()};
    const double reference = obnosov_effective(phases);
    const json& res = record["results"];

    ReportRow row;
    row.method = cfg["method"].get<std::string>();
    if (record["command"] == "fem") row.method = "fem";
    row.form = cfg["form"].get<std::string>();
    row.material = cfg["material"]["kind"].get<std::string>();
    row.epsilon = optional_number(cfg["material"]["epsilon"]);
    row.param_count = record["command"] == "fem" ? 0 : cfg["network"]["param_count"].get<long long>();
    if (record["test_basis"].is_object()) row.n_test = record["test_basis"]["size"].get<long long>();
    row.epochs = record["command"] == "fem" ? 0 : cfg["training"]["epochs"].get<long long>();
    row.seed = cfg["training"]["seed"].get<std::uint64_t>();
    row.primal_estimate_pct = percent(res["primal_estimate"], reference);
    row.dual_estimate_pct = percent(res["dual_estimate"], reference);
    row.upper_bound_pct = percent(res["upper_bound"], reference);
    row.lower_bound_pct = percent(res["lower_bound"], reference);
    if (const auto gap = optional_number(res["gap"])) row.gap_pct = 100.0 * *gap;
    row.suspected_failure = res["suspected_failure"].get<bool>();
    row.source = source;
    if (row.method == "fem") {
        row.label = "fem n=" + std::to_string(record["fem"]["n"].get<long long>()) + " " + row.material;
        if (row.epsilon) row.label += " eps=" + format_number(*row.epsilon);
    } else {
        row.label = make_label(row);
    }
    return row;
}

ReportInput collect_rows(const std::vector<std::filesystem::path>& inputs) {
    ReportInput out;
    for (const auto& input : inputs) {
        try {
            std::filesystem::path file = input;
            if (std::filesystem::is_directory(file)) file /= "run.json";
            if (!std::filesystem::exists(file)) {
                out.warnings.push_back(input.string() + ": no run record found, skipped");
                continue;
            }
            if (file.extension() == ".csv") {
                std::ifstream in(file);
                std::stringstream buf;
                buf << in.rdbuf();
                for (auto& row : parse_report_csv(buf.str())) out.rows.push_back(std::move(row));
                continue;
            }
            out.rows.push_back(row_from_record(read_json(file), file.string()));
        } catch (const std::exception& e) {
            out.warnings.push_back(input.string() + ": " + e.what() + ", skipped");
        }
    }
    return out;
}

void mark_best_in_group(std::vector<ReportRow>& rows) {
    auto width = [](const ReportRow& r) -> std::optional<double> {
        if (r.upper_bound_pct && r.lower_bound_pct) return *r.upper_bound_pct - *r.lower_bound_pct;
        return std::nullopt;
    };
    auto worst_estimate = [](const ReportRow& r) -> std::optional<double> {
        std::optional<double> worst;
        for (const auto& v : {r.primal_estimate_pct, r.dual_estimate_pct}) {
            if (v) worst = std::max(worst.value_or(0.0), std::abs(*v));
        }
        return worst;
    };
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].best_in_group = false;
        groups[rows[i].method].push_back(i);
    }
    for (const auto& [method, members] : groups) {
        const bool any_width = std::any_of(members.begin(), members.end(), [&](std::size_t i) { return width(rows[i]).has_value(); });
        std::optional<std::size_t> best;
        double best_metric = std::numeric_limits<double>::infinity();
        for (std::size_t i : members) {
            const auto metric = any_width ? width(rows[i]) : worst_estimate(rows[i]);
            if (metric && std::isfinite(*metric) && *metric < best_metric) {
                best_metric = *metric;
                best = i;
            }
        }
        if (best) rows[*best].best_in_group = true;
    }
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
    std::string text;
    const auto& columns = report_columns();
    for (std::size_t i = 0; i < columns.size(); ++i) text += (i ? "," : "") + columns[i];
    text += "\n";
    for (const auto& r : rows) {
        const std::vector<std::string> fields = {
            r.label,
            r.method,
            r.form,
            r.material,
            format_optional(r.epsilon),
            std::to_string(r.param_count),
            r.n_test ? std::to_string(*r.n_test) : std::string(),
            std::to_string(r.epochs),
            std::to_string(r.seed),
            format_optional(r.primal_estimate_pct),
            format_optional(r.dual_estimate_pct),
            format_optional(r.upper_bound_pct),
            format_optional(r.lower_bound_pct),
            format_optional(r.gap_pct),
            r.suspected_failure ? "1" : "0",
            r.best_in_group ? "1" : "0",
            r.source,
        };
        for (std::size_t i = 0; i < fields.size(); ++i) text += (i ? "," : "") + csv_field(fields[i]);
        text += "\n";
    }
    return text;
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::size_t pos = 0;
    if (text.empty()) throw ConfigError("empty report CSV");
    if (read_record(text, pos) != report_columns()) throw ConfigError("report CSV header does not match");
    std::vector<ReportRow> rows;
    while (pos < text.size()) {
        const auto f = read_record(text, pos);
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != report_columns().size()) throw ConfigError("report CSV row has the wrong number of fields");
        ReportRow r;
        r.label = f[0];
        r.method = f[1];
        r.form = f[2];
        r.material = f[3];
        r.epsilon = parse_optional(f[4]);
        r.param_count = parse_count(f[5]);
        if (!f[6].empty()) r.n_test = parse_count(f[6]);
        r.epochs = parse_count(f[7]);
        r.seed = parse_unsigned(f[8]);
        r.primal_estimate_pct = parse_optional(f[9]);
        r.dual_estimate_pct = parse_optional(f[10]);
        r.upper_bound_pct = parse_optional(f[11]);
        r.lower_bound_pct = parse_optional(f[12]);
        r.gap_pct = parse_optional(f[13]);
        r.suspected_failure = parse_flag(f[14]);
        r.best_in_group = parse_flag(f[15]);
        r.source = f[16];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace homog::app
