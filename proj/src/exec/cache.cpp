#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/exec/executor.hpp"

namespace fs = std::filesystem;

namespace qorpilot::exec {

Hash128 cache_key(const FlowRunConfig& config, Hash128 workspace_fingerprint) {
    Md5 m;
    m.update(flow::config_fingerprint(config).to_hex());
    m.update("\0", 1);
    m.update(workspace_fingerprint.to_hex());
    return m.digest();
}

std::optional<FlowCache::Entry> FlowCache::lookup(Hash128 key) {
    if (!enabled()) return std::nullopt;
    fs::path entry = dir_ / (key.to_hex() + ".json");
    if (!fs::exists(entry)) {
        ++misses;
        return std::nullopt;
    }
    try {
        Json j = Json::parse(read_file(entry));
        std::string report_json = j.at("report").dump();
        std::string checksum = j.at("checksum").get<std::string>();
        if (md5_hex(report_json) != checksum) {
            warnings_.push_back("cache entry " + key.to_hex() +
                                " failed its checksum; treated as a miss");
            ++misses;
            return std::nullopt;
        }
        Entry entry;
        entry.report = flow::parse_qor_json(report_json);
        if (j.contains("artifacts"))
            for (const auto& a : j["artifacts"])
                entry.artifact_paths.push_back(a.get<std::string>());
        ++hits;
        return entry;
    } catch (const std::exception& e) {
        warnings_.push_back("cache entry " + key.to_hex() + " unreadable (" + e.what() +
                            "); treated as a miss");
        ++misses;
        return std::nullopt;
    }
}

void FlowCache::store(Hash128 key, const QoRReport& report,
                      const std::vector<std::string>& artifact_paths) {
    if (!enabled()) return;
    fs::create_directories(dir_);
    Json j;
    j["key"] = key.to_hex();
    Json report_json = Json::parse(flow::render_qor_json(report));
    j["report"] = report_json;
    j["checksum"] = md5_hex(report_json.dump());
    j["artifacts"] = artifact_paths;
    write_file_atomic(dir_ / (key.to_hex() + ".json"), canonical_dump(j));
}

}  // namespace qorpilot::exec
