#include <algorithm>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/doc/docmaker.hpp"

namespace fs = std::filesystem;

namespace qorpilot::doc {

std::string render_card(const DocCard& card) {
    Json j;
    j["subject"] = card.subject.to_hex();
    j["role"] = card.role;
    Json io = Json::array();
    for (const auto& e : card.inputs_outputs)
        io.push_back(Json{{"name", e.name},
                          {"direction", e.direction},
                          {"description", e.description}});
    j["inputs_outputs"] = std::move(io);
    j["preconditions"] = card.preconditions;
    j["postconditions"] = card.postconditions;
    Json knobs = Json::array();
    for (const auto& k : card.config_knobs)
        knobs.push_back(Json{{"name", k.name}, {"default", k.default_value}, {"range", k.range}});
    j["config_knobs"] = std::move(knobs);
    j["referenced_apis"] = card.referenced_apis;
    j["evidence_checksum"] = card.evidence_checksum.to_hex();
    return canonical_dump(j);
}

DocCard parse_card(std::string_view bytes) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedCardFile(std::string("card file: ") + e.what());
    }
    try {
        DocCard card;
        auto subject = Hash128::from_hex(j.at("subject").get<std::string>());
        if (!subject) throw MalformedCardFile("card file: bad subject hash");
        card.subject = *subject;
        card.role = j.at("role").get<std::string>();
        for (const auto& e : j.at("inputs_outputs"))
            card.inputs_outputs.push_back({e.at("name").get<std::string>(),
                                           e.at("direction").get<std::string>(),
                                           e.value("description", std::string())});
        for (const auto& p : j.at("preconditions"))
            card.preconditions.push_back(p.get<std::string>());
        for (const auto& p : j.at("postconditions"))
            card.postconditions.push_back(p.get<std::string>());
        for (const auto& k : j.at("config_knobs"))
            card.config_knobs.push_back({k.at("name").get<std::string>(),
                                         k.value("default", std::string()),
                                         k.value("range", std::string())});
        for (const auto& a : j.at("referenced_apis"))
            card.referenced_apis.push_back(a.get<std::string>());
        auto checksum = Hash128::from_hex(j.at("evidence_checksum").get<std::string>());
        if (!checksum) throw MalformedCardFile("card file: bad evidence checksum");
        card.evidence_checksum = *checksum;
        return card;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedCardFile(std::string("card file: ") + e.what());
    }
}

const DocCard* CardStore::find(NodeId id) const {
    auto it = cards_.find(id);
    return it == cards_.end() ? nullptr : &it->second;
}

void CardStore::put(DocCard card) {
    cards_.insert_or_assign(card.subject, std::move(card));
}

void CardStore::save(const fs::path& dir) const {
    fs::create_directories(dir);
    for (const auto& [id, card] : cards_)
        write_file_atomic(dir / (id.to_hex() + ".json"), render_card(card));
}

CardStore CardStore::load(const fs::path& dir) {
    CardStore store;
    if (!fs::exists(dir)) return store;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) store.put(parse_card(read_file(p)));
    return store;
}

}  // namespace qorpilot::doc
