// Flow-side plumbing: the canonical QoR report schema with JSON and log-line
// parsers, flow run configuration with parameter validation, percent deltas,
// and the deterministic replay runner backed by fixture files.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qorpilot/support/error.hpp"
#include "qorpilot/support/hash.hpp"

namespace qorpilot::flow {

QORPILOT_DEFINE_ERROR(SchemaError);
QORPILOT_DEFINE_ERROR(NoMetricsFound);
QORPILOT_DEFINE_ERROR(NonpositiveBase);
QORPILOT_DEFINE_ERROR(UnknownScenario);
QORPILOT_DEFINE_ERROR(InvalidParameter);
QORPILOT_DEFINE_ERROR(MalformedFixture);

enum class Stage { Place, GlobalRoute, DetailedRoute, Sta, Full };

std::string_view stage_name(Stage s);
std::optional<Stage> stage_from(std::string_view name);

// Canonical metric field names, in schema order.
const std::vector<std::string>& qor_metric_fields();

struct QoRReport {
    std::string design;
    std::string pdk;
    Stage stage = Stage::Full;
    std::optional<double> routed_wirelength_um;  // >= 0
    std::optional<double> ecp_ns;                // > 0
    std::optional<double> wns_ns;
    std::optional<double> tns_ns;                // <= 0
    std::optional<int64_t> drc_count;            // >= 0
    std::optional<int64_t> via_count;            // >= 0
    std::optional<double> density;               // [0, 1]
    std::optional<double> power_w;               // >= 0
    std::optional<int64_t> instance_count;       // >= 0

    bool operator==(const QoRReport&) const = default;

    std::optional<double> metric(std::string_view field) const;
    void set_metric(std::string_view field, double value);
    bool has_any_metric() const;
};

std::string render_qor_json(const QoRReport& report);  // canonical
QoRReport parse_qor_json(std::string_view bytes);      // throws SchemaError
// `key = value` lines; canonical keys plus aliases (wirelength, wns,
// drc_violations, ...); last occurrence wins; unknown lines ignored.
QoRReport parse_qor_log(std::string_view lines);       // throws NoMetricsFound

// 100 * (new - base) / base. Throws NonpositiveBase.
double delta_percent(double base, double new_value);
// round-half-away-from-zero to 2 decimals
double round2(double percent);
// "-5.49", "+0.52", "0.00"
std::string format_delta(double percent);

// --- flow configuration -----------------------------------------------------------

struct FlowRunConfig {
    std::string design;
    std::string pdk;  // "ASAP7", "SKY130HD", "Nangate45" or free-form text
    Stage stage = Stage::Full;
    std::map<std::string, std::string> parameters;

    bool operator==(const FlowRunConfig&) const = default;
};

std::string render_flow_config(const FlowRunConfig& config);  // canonical JSON
FlowRunConfig parse_flow_config_json(std::string_view bytes);
// KEY=VALUE lines; DESIGN/PDK/STAGE fill the fields, everything else is a
// parameter. Validates known parameters, warns on unknown ones.
FlowRunConfig parse_flow_config(std::string_view text,
                                std::vector<std::string>* warnings = nullptr);
// throws InvalidParameter naming the key
void validate_parameters(const FlowRunConfig& config,
                         std::vector<std::string>* warnings = nullptr);

Hash128 config_fingerprint(const FlowRunConfig& config);

// Patch fingerprints chain over applied patch texts:
//   fp0 = md5(""), fp_{i+1} = md5(fp_i_hex + "\n" + md5(patch_text)_hex)
std::string baseline_patch_fingerprint();
std::string chain_patch_fingerprint(const std::string& previous_fp_hex,
                                    const std::string& patch_text);

// --- replay fixtures ----------------------------------------------------------------

struct FlowFixture {
    // (config fingerprint, patch fingerprint) -> report
    std::map<std::pair<Hash128, std::string>, QoRReport> entries;

    void add(const FlowRunConfig& config, const std::string& patch_fp, QoRReport report);
    std::string to_jsonl() const;
    static FlowFixture from_jsonl(std::string_view text);  // throws MalformedFixture
    static FlowFixture load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

private:
    // original (config, patch) rows in insertion order, for serialization
    std::vector<std::tuple<FlowRunConfig, std::string, QoRReport>> rows_;
};

// Exact-match lookup; throws UnknownScenario.
QoRReport replay_run(const FlowFixture& fixture, const FlowRunConfig& config,
                     const std::string& patch_fingerprint);

// --- design attributes ---------------------------------------------------------------

struct DesignAttributes {
    std::string design;
    int64_t cells = 0;
    int64_t macros = 0;
    int64_t nets = 0;
    int64_t pins = 0;
};

// pins >= nets expected; violations are reported as warnings, never fatal
std::vector<DesignAttributes> parse_design_attributes(std::string_view json,
                                                      std::vector<std::string>* warnings);

}  // namespace qorpilot::flow
