#include <cmath>

#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/flow/flowsim.hpp"

namespace qorpilot::flow {

namespace {

double numeric(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw InvalidParameter(key + ": value '" + value + "' is not numeric");
    }
}

}  // namespace

void validate_parameters(const FlowRunConfig& config, std::vector<std::string>* warnings) {
    for (const auto& [key, value] : config.parameters) {
        if (key == "CORE_UTIL") {
            double v = numeric(key, value);
            if (!(v > 0 && v <= 100))
                throw InvalidParameter("CORE_UTIL: " + value + " outside (0, 100]");
        } else if (key == "PLACEMENT_LB_ADDON") {
            double v = numeric(key, value);
            if (!(v >= 0))
                throw InvalidParameter("PLACEMENT_LB_ADDON: " + value + " must be >= 0");
        } else if (key == "CORE_ASPECT_RATIO") {
            double v = numeric(key, value);
            if (!(v > 0))
                throw InvalidParameter("CORE_ASPECT_RATIO: " + value + " must be > 0");
        } else if (key == "CORE_MARGIN") {
            double v = numeric(key, value);
            if (!(v >= 0)) throw InvalidParameter("CORE_MARGIN: " + value + " must be >= 0");
        } else if (key == "ENABLE_DPO") {
            if (value != "0" && value != "1")
                throw InvalidParameter("ENABLE_DPO: " + value + " not in {0, 1}");
        } else if (key == "EQUIVALENCE_CHECK") {
            if (value != "0" && value != "1")
                throw InvalidParameter("EQUIVALENCE_CHECK: " + value + " not in {0, 1}");
        } else if (key == "TARGET_CLOCK_PERIOD_NS") {
            double v = numeric(key, value);
            if (!(v > 0))
                throw InvalidParameter("TARGET_CLOCK_PERIOD_NS: " + value + " must be > 0");
        } else if (warnings) {
            warnings->push_back("unknown flow parameter passes through: " + key);
        }
    }
}

FlowRunConfig parse_flow_config(std::string_view text, std::vector<std::string>* warnings) {
    FlowRunConfig config;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string line(text.substr(pos, eol - pos));
        pos = eol + 1;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            if (eol == text.size()) break;
            continue;
        }
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            if (warnings) warnings->push_back("ignored line without '=': " + trimmed);
            if (eol == text.size()) break;
            continue;
        }
        std::string key = trim(trimmed.substr(0, eq));
        std::string value = trim(trimmed.substr(eq + 1));
        if (key == "DESIGN") config.design = value;
        else if (key == "PDK" || key == "PLATFORM") config.pdk = value;
        else if (key == "STAGE") {
            auto stage = stage_from(value);
            if (!stage) throw InvalidParameter("STAGE: unknown stage '" + value + "'");
            config.stage = *stage;
        } else {
            config.parameters[key] = value;
        }
        if (eol == text.size()) break;
    }
    validate_parameters(config, warnings);
    return config;
}

std::string render_flow_config(const FlowRunConfig& config) {
    Json j;
    j["design"] = config.design;
    j["pdk"] = config.pdk;
    j["stage"] = stage_name(config.stage);
    Json params = Json::object();
    for (const auto& [key, value] : config.parameters) params[key] = value;
    j["parameters"] = std::move(params);
    return canonical_dump(j);
}

FlowRunConfig parse_flow_config_json(std::string_view bytes) {
    Json j = parse_json(bytes, "flow config");
    try {
        FlowRunConfig config;
        config.design = j.at("design").get<std::string>();
        config.pdk = j.at("pdk").get<std::string>();
        auto stage = stage_from(j.at("stage").get<std::string>());
        if (!stage) throw InvalidParameter("STAGE: unknown stage in flow config");
        config.stage = *stage;
        for (const auto& [key, value] : j.at("parameters").items())
            config.parameters[key] = value.get<std::string>();
        validate_parameters(config, nullptr);
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw JsonParseError(std::string("flow config: ") + e.what());
    }
}

Hash128 config_fingerprint(const FlowRunConfig& config) {
    return md5(render_flow_config(config));
}

std::string baseline_patch_fingerprint() { return md5_hex(""); }

std::string chain_patch_fingerprint(const std::string& previous_fp_hex,
                                    const std::string& patch_text) {
    return md5_hex(previous_fp_hex + "\n" + md5_hex(patch_text));
}

std::vector<DesignAttributes> parse_design_attributes(std::string_view json,
                                                      std::vector<std::string>* warnings) {
    Json j = parse_json(json, "design attributes");
    std::vector<DesignAttributes> out;
    for (const auto& row : j) {
        DesignAttributes a;
        a.design = row.at("design").get<std::string>();
        a.cells = row.at("cells").get<int64_t>();
        a.macros = row.at("macros").get<int64_t>();
        a.nets = row.at("nets").get<int64_t>();
        a.pins = row.at("pins").get<int64_t>();
        if (a.cells < 0 || a.macros < 0 || a.nets < 0 || a.pins < 0)
            throw SchemaError("design attributes: negative count for " + a.design);
        if (a.pins < a.nets && warnings)
            warnings->push_back(a.design + ": pins < nets (" + std::to_string(a.pins) + " < " +
                                std::to_string(a.nets) + ")");
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace qorpilot::flow
