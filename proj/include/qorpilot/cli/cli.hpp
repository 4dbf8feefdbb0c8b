// Single entry-point command: every stage as a subcommand plus an end-to-end
// run, over one structured config file with env-var and flag overrides.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/flow/flowsim.hpp"

namespace qorpilot::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kEnvPrefix = "QORPILOT_";

QORPILOT_DEFINE_ERROR(UsageError);
QORPILOT_DEFINE_ERROR(MissingArtifact);

// Exit codes per the external contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Layered configuration: defaults < file < environment < flags. Flags are
// applied by the command parser; this type resolves file + env lookups.
class Config {
public:
    static Config load(const std::optional<std::filesystem::path>& file);

    std::string str(const std::string& dotted_key, const std::string& fallback = {}) const;
    double number(const std::string& dotted_key, double fallback) const;
    bool boolean(const std::string& dotted_key, bool fallback) const;
    std::vector<std::string> list(const std::string& dotted_key) const;
    const Json& root() const { return root_; }
    Json section(const std::string& name) const;

private:
    const Json* find(const std::string& dotted_key) const;
    Json root_ = Json::object();
};

// flow template from the config's flow.* section (string key/value pairs)
flow::FlowRunConfig flow_template_from(const Config& config);

// JSON-lines event log on stderr.
void log_event(const std::string& level, const std::string& event, const Json& fields);

int run_cli(int argc, char** argv);

// --- report rendering -------------------------------------------------------

struct ReportRow {
    std::string pdk;
    std::string design;
    double base = 0;
    double new_value = 0;
    double delta_pct = 0;  // exact; rendering rounds
};

// rows sorted by (pdk, design)
std::string render_report_text(std::vector<ReportRow> rows, const std::string& metric);
std::string render_report_json(std::vector<ReportRow> rows, const std::string& metric);

}  // namespace qorpilot::cli
