#include <cstdlib>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/cli/cli.hpp"

extern char** environ;

namespace qorpilot::cli {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// QORPILOT_INDEX_ALPHA -> index.alpha; QORPILOT_SYNTH_CMD is a spec'd alias.
std::optional<std::string> env_to_key(const std::string& name) {
    if (name == "QORPILOT_SYNTH_CMD") return "docmaker.synthesizer_cmd";
    std::string prefix = kEnvPrefix;
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    std::string rest = name.substr(prefix.size());
    size_t underscore = rest.find('_');
    if (underscore == std::string::npos) return std::nullopt;
    return lower(rest.substr(0, underscore)) + "." + lower(rest.substr(underscore + 1));
}

void set_dotted(Json& root, const std::string& dotted_key, const std::string& value) {
    size_t dot = dotted_key.find('.');
    if (dot == std::string::npos) {
        root[dotted_key] = value;
        return;
    }
    std::string head = dotted_key.substr(0, dot);
    if (!root.contains(head) || !root[head].is_object()) root[head] = Json::object();
    set_dotted(root[head], dotted_key.substr(dot + 1), value);
}

}  // namespace

Config Config::load(const std::optional<std::filesystem::path>& file) {
    Config config;
    if (file) {
        config.root_ = parse_json(read_file(*file), "config file " + file->string());
        if (!config.root_.is_object())
            throw UsageError("config file must hold a JSON object");
    }
    // environment overrides the file
    for (char** env = environ; env && *env; ++env) {
        std::string entry = *env;
        size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        auto key = env_to_key(entry.substr(0, eq));
        if (key) set_dotted(config.root_, *key, entry.substr(eq + 1));
    }
    return config;
}

const Json* Config::find(const std::string& dotted_key) const {
    const Json* current = &root_;
    size_t start = 0;
    while (true) {
        size_t dot = dotted_key.find('.', start);
        std::string part = dotted_key.substr(start, dot - start);
        if (!current->is_object() || !current->contains(part)) return nullptr;
        current = &(*current)[part];
        if (dot == std::string::npos) return current;
        start = dot + 1;
    }
}

std::string Config::str(const std::string& dotted_key, const std::string& fallback) const {
    const Json* v = find(dotted_key);
    if (!v) return fallback;
    if (v->is_string()) return v->get<std::string>();
    return v->dump();
}

double Config::number(const std::string& dotted_key, double fallback) const {
    const Json* v = find(dotted_key);
    if (!v) return fallback;
    if (v->is_number()) return v->get<double>();
    if (v->is_string()) {
        try {
            return std::stod(v->get<std::string>());
        } catch (const std::exception&) {
        }
    }
    return fallback;
}

bool Config::boolean(const std::string& dotted_key, bool fallback) const {
    const Json* v = find(dotted_key);
    if (!v) return fallback;
    if (v->is_boolean()) return v->get<bool>();
    if (v->is_string()) {
        std::string s = lower(v->get<std::string>());
        if (s == "1" || s == "true" || s == "yes") return true;
        if (s == "0" || s == "false" || s == "no") return false;
    }
    return fallback;
}

std::vector<std::string> Config::list(const std::string& dotted_key) const {
    std::vector<std::string> out;
    const Json* v = find(dotted_key);
    if (!v) return out;
    if (v->is_array()) {
        for (const auto& item : *v)
            out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
    } else if (v->is_string()) {
        std::string current;
        for (char c : v->get<std::string>() + ",") {
            if (c == ',') {
                if (!current.empty()) out.push_back(current);
                current.clear();
            } else {
                current += c;
            }
        }
    }
    return out;
}

Json Config::section(const std::string& name) const {
    const Json* v = find(name);
    return v && v->is_object() ? *v : Json::object();
}

flow::FlowRunConfig flow_template_from(const Config& config) {
    flow::FlowRunConfig tmpl;
    const Json section = config.section("flow");
    for (const auto& [key, value] : section.items()) {
        std::string v = value.is_string() ? value.get<std::string>() : value.dump();
        if (key == "DESIGN") tmpl.design = v;
        else if (key == "PDK" || key == "PLATFORM") tmpl.pdk = v;
        else if (key == "STAGE") {
            auto stage = flow::stage_from(v);
            if (!stage) throw flow::InvalidParameter("STAGE: unknown stage '" + v + "'");
            tmpl.stage = *stage;
        } else {
            tmpl.parameters[key] = v;
        }
    }
    flow::validate_parameters(tmpl, nullptr);
    return tmpl;
}

void log_event(const std::string& level, const std::string& event, const Json& fields) {
    Json j;
    j["level"] = level;
    j["event"] = event;
    for (const auto& [key, value] : fields.items()) j[key] = value;
    std::fputs((j.dump() + "\n").c_str(), stderr);
}

}  // namespace qorpilot::cli
