#include "homog_app/schema.hpp"

#include "run_record_schema.inc"

namespace homog::app {

namespace {

using json = nlohmann::json;

bool has_type(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    if (type == "number") return v.is_number();
    if (type == "integer") {
        if (v.is_number_integer()) return true;
        return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
    }
    return false;
}

void check(const json& v, const json& schema, const std::string& where, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        std::string names;
        for (const auto& name : t.is_array() ? t : json::array({t})) {
            ok = ok || has_type(v, name.get<std::string>());
            names += (names.empty() ? "" : "|") + name.get<std::string>();
        }
        if (!ok) {
            errors.push_back(where + ": expected type " + names + ", got " + v.type_name());
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& option : schema["enum"]) found = found || option == v;
        if (!found) errors.push_back(where + ": value " + v.dump() + " not in " + schema["enum"].dump());
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>())
            errors.push_back(where + ": " + v.dump() + " below minimum " + schema["minimum"].dump());
        if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
            errors.push_back(where + ": " + v.dump() + " not above " + schema["exclusiveMinimum"].dump());
    }
    if (v.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema["required"]) {
                if (!v.contains(key.get<std::string>()))
                    errors.push_back(where + ": missing required key '" + key.get<std::string>() + "'");
            }
        }
        const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
        for (const auto& item : v.items()) {
            const std::string child = where + "/" + item.key();
            if (props && props->contains(item.key())) {
                check(item.value(), (*props)[item.key()], child, errors);
            } else if (schema.contains("additionalProperties")) {
                const json& extra = schema["additionalProperties"];
                if (extra.is_boolean()) {
                    if (!extra.get<bool>()) errors.push_back(child + ": unexpected key");
                } else {
                    check(item.value(), extra, child, errors);
                }
            }
        }
    }
    if (v.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) check(v[i], schema["items"], where + "/" + std::to_string(i), errors);
    }
}

}  // namespace

const json& run_record_schema() {
    static const json schema = json::parse(kRunRecordSchemaText);
    return schema;
}

std::vector<std::string> schema_violations(const json& value, const json& schema) {
    std::vector<std::string> errors;
    check(value, schema, "", errors);
    return errors;
}

}  // namespace homog::app
