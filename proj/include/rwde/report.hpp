#pragma once

// Experiment reports: a fixed, versioned JSON layout (machine) plus an
// aligned text rendering (human). Serialization is deterministic so that
// seed-reproducibility can be asserted byte-for-byte modulo the runtime
// field.

#include <json.hpp>

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace rwde {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct TargetValue {
    std::string exact;       // rational string, empty when no exact target exists
    double value = 0.0;      // numeric target
    std::string provenance;  // where the number comes from
};

struct Statistic {
    std::string type;  // "z-score", "ks", "exact", "ladder"
    double value = 0.0;
    double p_value = -1.0;    // < 0 when not applicable
    double threshold = 0.0;   // acceptance threshold for `value` or `p_value`
};

struct ExperimentReport {
    std::string name;
    std::string anchor;  // identity this experiment confronts (catalog label)
    Json parameters = Json::object();
    double estimate = 0.0;
    double standard_error = 0.0;
    TargetValue target;
    Statistic statistic;
    bool pass = false;
    Json details = Json::object();
    double runtime_seconds = 0.0;
};

inline Json report_to_json(const ExperimentReport& r) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["name"] = r.name;
    j["anchor"] = r.anchor;
    j["parameters"] = r.parameters;
    j["estimate"] = r.estimate;
    j["standard_error"] = r.standard_error;
    j["target"] = Json{{"exact", r.target.exact},
                       {"value", r.target.value},
                       {"provenance", r.target.provenance}};
    j["statistic"] = Json{{"type", r.statistic.type},
                          {"value", r.statistic.value},
                          {"p_value", r.statistic.p_value},
                          {"threshold", r.statistic.threshold}};
    j["verdict"] = r.pass ? "pass" : "fail";
    j["details"] = r.details;
    j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

// Structural validation mirroring docs/report_schema.json.
inline std::vector<std::string> validate_report_json(const Json& j) {
    std::vector<std::string> errors;
    auto need = [&](const char* key, const char* type) {
        if (!j.contains(key)) {
            errors.push_back(std::string("missing field: ") + key);
            return false;
        }
        const auto& v = j.at(key);
        const std::string t = type;
        const bool ok = (t == "string" && v.is_string()) || (t == "number" && v.is_number()) ||
                        (t == "object" && v.is_object()) || (t == "integer" && v.is_number_integer());
        if (!ok) errors.push_back(std::string("field ") + key + " is not a " + type);
        return ok;
    };
    need("schema_version", "integer");
    need("name", "string");
    need("anchor", "string");
    need("parameters", "object");
    need("estimate", "number");
    need("standard_error", "number");
    if (need("target", "object")) {
        const auto& t = j.at("target");
        if (!t.contains("exact") || !t.at("exact").is_string()) errors.push_back("target.exact must be a string");
        if (!t.contains("value") || !t.at("value").is_number()) errors.push_back("target.value must be a number");
        if (!t.contains("provenance") || !t.at("provenance").is_string())
            errors.push_back("target.provenance must be a string");
    }
    if (need("statistic", "object")) {
        const auto& s = j.at("statistic");
        for (const char* k : {"value", "p_value", "threshold"})
            if (!s.contains(k) || !s.at(k).is_number())
                errors.push_back(std::string("statistic.") + k + " must be a number");
        if (!s.contains("type") || !s.at("type").is_string()) errors.push_back("statistic.type must be a string");
    }
    if (j.contains("verdict")) {
        const auto& v = j.at("verdict");
        if (!v.is_string() || (v != "pass" && v != "fail"))
            errors.push_back("verdict must be \"pass\" or \"fail\"");
    } else {
        errors.push_back("missing field: verdict");
    }
    need("details", "object");
    need("runtime_seconds", "number");
    return errors;
}

inline std::string render_report_text(const ExperimentReport& r) {
    std::ostringstream os;
    os << std::left << std::setw(26) << r.name << std::setw(12) << r.anchor;
    os << std::right << std::setprecision(6) << std::fixed;
    os << "est " << std::setw(10) << r.estimate << " +- " << std::setw(9) << r.standard_error;
    os << "  target " << std::setw(10) << r.target.value;
    if (!r.target.exact.empty()) os << " (= " << r.target.exact << ")";
    os << "  " << r.statistic.type << " " << std::setprecision(3) << r.statistic.value;
    if (r.statistic.p_value >= 0.0) os << " (p=" << std::setprecision(4) << r.statistic.p_value << ")";
    os << "  " << (r.pass ? "PASS" : "FAIL");
    return os.str();
}

}  // namespace rwde
