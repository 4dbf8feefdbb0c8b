#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/flow/flowsim.hpp"

namespace qorpilot::flow {

void FlowFixture::add(const FlowRunConfig& config, const std::string& patch_fp,
                      QoRReport report) {
    entries[{config_fingerprint(config), patch_fp}] = report;
    rows_.emplace_back(config, patch_fp, std::move(report));
}

std::string FlowFixture::to_jsonl() const {
    std::string out;
    for (const auto& [config, patch, report] : rows_) {
        Json line;
        line["config"] = Json::parse(render_flow_config(config));
        line["patch"] = patch;
        line["report"] = Json::parse(render_qor_json(report));
        out += line.dump();
        out += "\n";
    }
    return out;
}

FlowFixture FlowFixture::from_jsonl(std::string_view text) {
    FlowFixture fixture;
    size_t pos = 0;
    size_t line_no = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            Json j = Json::parse(line);
            FlowRunConfig config = parse_flow_config_json(j.at("config").dump());
            std::string patch = j.at("patch").get<std::string>();
            QoRReport report = parse_qor_json(j.at("report").dump());
            fixture.add(config, patch, std::move(report));
        } catch (const std::exception& e) {
            throw MalformedFixture("fixture line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return fixture;
}

FlowFixture FlowFixture::load(const std::filesystem::path& file) {
    return from_jsonl(read_file(file));
}

void FlowFixture::save(const std::filesystem::path& file) const {
    write_file_atomic(file, to_jsonl());
}

QoRReport replay_run(const FlowFixture& fixture, const FlowRunConfig& config,
                     const std::string& patch_fingerprint) {
    auto it = fixture.entries.find({config_fingerprint(config), patch_fingerprint});
    if (it == fixture.entries.end())
        throw UnknownScenario("no fixture entry for config " +
                              config_fingerprint(config).to_hex() + " / patch " +
                              patch_fingerprint);
    return it->second;
}

}  // namespace qorpilot::flow
