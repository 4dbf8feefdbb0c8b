#include <cmath>
#include <cstdio>

#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/flow/flowsim.hpp"

namespace qorpilot::flow {

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::Place: return "Place";
        case Stage::GlobalRoute: return "GlobalRoute";
        case Stage::DetailedRoute: return "DetailedRoute";
        case Stage::Sta: return "Sta";
        case Stage::Full: return "Full";
    }
    return "Full";
}

std::optional<Stage> stage_from(std::string_view name) {
    if (name == "Place") return Stage::Place;
    if (name == "GlobalRoute") return Stage::GlobalRoute;
    if (name == "DetailedRoute") return Stage::DetailedRoute;
    if (name == "Sta") return Stage::Sta;
    if (name == "Full") return Stage::Full;
    return std::nullopt;
}

const std::vector<std::string>& qor_metric_fields() {
    static const std::vector<std::string> fields = {
        "routed_wirelength_um", "ecp_ns",  "wns_ns",  "tns_ns",        "drc_count",
        "via_count",            "density", "power_w", "instance_count"};
    return fields;
}

std::optional<double> QoRReport::metric(std::string_view field) const {
    if (field == "routed_wirelength_um") return routed_wirelength_um;
    if (field == "ecp_ns") return ecp_ns;
    if (field == "wns_ns") return wns_ns;
    if (field == "tns_ns") return tns_ns;
    if (field == "drc_count")
        return drc_count ? std::optional<double>(static_cast<double>(*drc_count))
                         : std::nullopt;
    if (field == "via_count")
        return via_count ? std::optional<double>(static_cast<double>(*via_count))
                         : std::nullopt;
    if (field == "density") return density;
    if (field == "power_w") return power_w;
    if (field == "instance_count")
        return instance_count ? std::optional<double>(static_cast<double>(*instance_count))
                              : std::nullopt;
    return std::nullopt;
}

void QoRReport::set_metric(std::string_view field, double value) {
    if (field == "routed_wirelength_um") routed_wirelength_um = value;
    else if (field == "ecp_ns") ecp_ns = value;
    else if (field == "wns_ns") wns_ns = value;
    else if (field == "tns_ns") tns_ns = value;
    else if (field == "drc_count") drc_count = static_cast<int64_t>(value);
    else if (field == "via_count") via_count = static_cast<int64_t>(value);
    else if (field == "density") density = value;
    else if (field == "power_w") power_w = value;
    else if (field == "instance_count") instance_count = static_cast<int64_t>(value);
}

bool QoRReport::has_any_metric() const {
    for (const auto& field : qor_metric_fields())
        if (metric(field)) return true;
    return false;
}

namespace {

void check_constraints(const QoRReport& r) {
    if (!r.has_any_metric())
        throw SchemaError("report: at least one metric must be present");
    if (r.routed_wirelength_um && *r.routed_wirelength_um < 0)
        throw SchemaError("routed_wirelength_um: negative");
    if (r.ecp_ns && *r.ecp_ns <= 0) throw SchemaError("ecp_ns: must be positive");
    if (r.tns_ns && *r.tns_ns > 0) throw SchemaError("tns_ns: must be <= 0");
    if (r.drc_count && *r.drc_count < 0) throw SchemaError("drc_count: negative");
    if (r.via_count && *r.via_count < 0) throw SchemaError("via_count: negative");
    if (r.density && (*r.density < 0 || *r.density > 1))
        throw SchemaError("density: outside [0, 1]");
    if (r.power_w && *r.power_w < 0) throw SchemaError("power_w: negative");
    if (r.instance_count && *r.instance_count < 0)
        throw SchemaError("instance_count: negative");
}

}  // namespace

std::string render_qor_json(const QoRReport& report) {
    Json j;
    j["design"] = report.design;
    j["pdk"] = report.pdk;
    j["stage"] = stage_name(report.stage);
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    auto put_int = [&](const char* key, const std::optional<int64_t>& v) {
        if (v) j[key] = *v;
    };
    put("routed_wirelength_um", report.routed_wirelength_um);
    put("ecp_ns", report.ecp_ns);
    put("wns_ns", report.wns_ns);
    put("tns_ns", report.tns_ns);
    put_int("drc_count", report.drc_count);
    put_int("via_count", report.via_count);
    put("density", report.density);
    put("power_w", report.power_w);
    put_int("instance_count", report.instance_count);
    return canonical_dump(j);
}

QoRReport parse_qor_json(std::string_view bytes) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("report: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("report: not an object");
    QoRReport r;
    for (const auto& [key, value] : j.items()) {
        if (key == "design") {
            if (!value.is_string()) throw SchemaError("design: not a string");
            r.design = value.get<std::string>();
        } else if (key == "pdk") {
            if (!value.is_string()) throw SchemaError("pdk: not a string");
            r.pdk = value.get<std::string>();
        } else if (key == "stage") {
            auto stage = stage_from(value.get<std::string>());
            if (!stage) throw SchemaError("stage: unknown value");
            r.stage = *stage;
        } else {
            const auto& fields = qor_metric_fields();
            if (std::find(fields.begin(), fields.end(), key) == fields.end())
                throw SchemaError(key + ": unknown field");
            if (value.is_string()) {
                if (value.get<std::string>() == "N/A") continue;  // absent, never zero
                throw SchemaError(key + ": non-numeric value");
            }
            if (!value.is_number()) throw SchemaError(key + ": non-numeric value");
            r.set_metric(key, value.get<double>());
        }
    }
    check_constraints(r);
    return r;
}

QoRReport parse_qor_log(std::string_view lines) {
    static const std::map<std::string, std::string> aliases = {
        {"wirelength", "routed_wirelength_um"},
        {"wns", "wns_ns"},
        {"tns", "tns_ns"},
        {"ecp", "ecp_ns"},
        {"drc_violations", "drc_count"},
        {"drcs", "drc_count"},
        {"vias", "via_count"},
        {"power", "power_w"},
        {"instances", "instance_count"}};

    QoRReport r;
    bool any = false;
    size_t pos = 0;
    while (pos <= lines.size()) {
        size_t eol = lines.find('\n', pos);
        if (eol == std::string_view::npos) eol = lines.size();
        std::string line(lines.substr(pos, eol - pos));
        pos = eol + 1;
        size_t eq = line.find('=');
        if (eq != std::string::npos) {
            auto trim = [](std::string s) {
                size_t a = s.find_first_not_of(" \t\r");
                size_t b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            auto alias = aliases.find(key);
            if (alias != aliases.end()) key = alias->second;
            if (key == "design") {
                r.design = value;
                any = true;
            } else if (key == "pdk") {
                r.pdk = value;
                any = true;
            } else if (key == "stage") {
                if (auto stage = stage_from(value)) {
                    r.stage = *stage;
                    any = true;
                }
            } else {
                const auto& fields = qor_metric_fields();
                if (std::find(fields.begin(), fields.end(), key) != fields.end()) {
                    try {
                        r.set_metric(key, std::stod(value));  // last occurrence wins
                        any = true;
                    } catch (const std::exception&) {
                        // unparsable value: ignored like any unknown line
                    }
                }
            }
        }
        if (eol == lines.size()) break;
    }
    if (!any || !r.has_any_metric())
        throw NoMetricsFound("no recognizable metrics in log input");
    check_constraints(r);
    return r;
}

double delta_percent(double base, double new_value) {
    if (!(base > 0)) throw NonpositiveBase("delta base must be positive, got " +
                                           format_double(base));
    return 100.0 * (new_value - base) / base;
}

double round2(double percent) {
    // std::round is round-half-away-from-zero
    return std::round(percent * 100.0) / 100.0;
}

std::string format_delta(double percent) {
    double r = round2(percent);
    if (r == 0) return "0.00";  // avoid "-0.00"
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", r);
    return buf;
}

}  // namespace qorpilot::flow
