#include <algorithm>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/retrieval/index.hpp"

namespace fs = std::filesystem;

namespace qorpilot::retrieval {

void Index::save(const fs::path& dir) const {
    fs::create_directories(dir);
    Json docs = Json::array();
    for (const auto& [id, doc] : docs_) {
        Json d;
        d["doc_id"] = id.to_hex();
        d["source"] = source_name(doc.source);
        d["subject"] = doc.subject ? Json(doc.subject->to_hex()) : Json(nullptr);
        d["text"] = doc.text;
        d["domain_tags"] = doc.domain_tags;
        docs.push_back(std::move(d));
    }
    write_file_atomic(dir / "docs-000.json", canonical_dump(docs));

    Json manifest;
    manifest["version"] = 1;
    Json cfg;
    cfg["alpha"] = config_.alpha;
    cfg["beta"] = config_.beta;
    cfg["gamma"] = config_.gamma;
    cfg["k1"] = config_.k1;
    cfg["b"] = config_.b;
    cfg["embed_dim"] = config_.embed_dim;
    cfg["hop_cap"] = config_.hop_cap;
    manifest["config"] = std::move(cfg);
    std::string embedder_spec = "hashing";
    if (auto* process = dynamic_cast<const ProcessEmbedder*>(embedder_.get()))
        embedder_spec = "process:" + process->command();
    manifest["embedder"] = embedder_spec;
    manifest["doc_count"] = docs_.size();
    manifest["segments"] = Json::array({"docs-000.json"});
    write_file_atomic(dir / "manifest.json", canonical_dump(manifest));
}

Index Index::load(const fs::path& dir) {
    Json manifest;
    try {
        manifest = Json::parse(read_file(dir / "manifest.json"));
    } catch (const std::exception& e) {
        throw MalformedIndexFile(std::string("index manifest: ") + e.what());
    }
    try {
        if (manifest.value("version", 0) != 1)
            throw MalformedIndexFile("index manifest: unsupported version");
        IndexConfig config;
        const Json& cfg = manifest.at("config");
        config.alpha = cfg.at("alpha").get<double>();
        config.beta = cfg.at("beta").get<double>();
        config.gamma = cfg.at("gamma").get<double>();
        config.k1 = cfg.at("k1").get<double>();
        config.b = cfg.at("b").get<double>();
        config.embed_dim = cfg.at("embed_dim").get<size_t>();
        config.hop_cap = cfg.at("hop_cap").get<double>();
        std::string embedder_spec = manifest.value("embedder", "hashing");
        std::shared_ptr<Embedder> embedder;
        if (embedder_spec == "hashing")
            embedder = std::make_shared<HashingEmbedder>(config.embed_dim);
        else if (embedder_spec.rfind("process:", 0) == 0)
            embedder =
                std::make_shared<ProcessEmbedder>(embedder_spec.substr(8), config.embed_dim);
        else
            throw MalformedIndexFile("index manifest: unknown embedder backend");

        Index index(config, embedder);
        std::vector<IndexedDoc> docs;
        for (const auto& seg : manifest.at("segments")) {
            Json arr = Json::parse(read_file(dir / seg.get<std::string>()));
            for (const auto& d : arr) {
                IndexedDoc doc;
                auto id = Hash128::from_hex(d.at("doc_id").get<std::string>());
                if (!id) throw MalformedIndexFile("index doc: bad doc_id");
                doc.doc_id = *id;
                auto source = source_from(d.at("source").get<std::string>());
                if (!source) throw MalformedIndexFile("index doc: bad source");
                doc.source = *source;
                if (!d.at("subject").is_null()) {
                    auto subject = Hash128::from_hex(d.at("subject").get<std::string>());
                    if (!subject) throw MalformedIndexFile("index doc: bad subject");
                    doc.subject = *subject;
                }
                doc.text = d.at("text").get<std::string>();
                for (const auto& tag : d.at("domain_tags"))
                    doc.domain_tags.insert(tag.get<std::string>());
                docs.push_back(std::move(doc));
            }
        }
        index.update(std::move(docs), {});
        return index;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedIndexFile(std::string("index file: ") + e.what());
    }
}

std::set<std::string> tags_for_node(const graph::CodeGraph& graph, graph::NodeId id) {
    std::set<std::string> tags;
    const graph::GraphNode* node = graph.find(id);
    if (!node) return tags;
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    };
    std::string path = node->path;
    size_t start = 0;
    std::vector<std::string> parts;
    for (size_t i = 0; i <= path.size(); ++i) {
        if (i == path.size() || path[i] == '/') {
            parts.push_back(path.substr(start, i - start));
            start = i + 1;
        }
    }
    for (size_t i = 0; i + 1 < parts.size(); ++i)
        if (!parts[i].empty()) tags.insert(lower(parts[i]));
    if (!parts.empty()) {
        std::string stem = parts.back();
        size_t dot = stem.rfind('.');
        if (dot != std::string::npos) stem = stem.substr(0, dot);
        if (!stem.empty()) tags.insert(lower(stem));
    }
    tags.insert(lower(std::string(syntax::language_name(node->language))));
    return tags;
}

IndexedDoc doc_from_card(const doc::DocCard& card, const graph::CodeGraph& graph) {
    IndexedDoc doc;
    doc.doc_id = md5("card:" + card.subject.to_hex());
    doc.source = Source::Card;
    doc.subject = card.subject;
    doc.domain_tags = tags_for_node(graph, card.subject);

    const graph::GraphNode* node = graph.find(card.subject);
    std::string text;
    if (node) {
        text += "api: " + node->qualified_name + "\n";
        text += "kind: " + std::string(graph::node_kind_name(node->kind)) + "\n";
    }
    text += "role: " + card.role + "\n";
    for (const auto& io : card.inputs_outputs)
        text += "io: " + io.name + " " + io.direction + " " + io.description + "\n";
    for (const auto& p : card.preconditions) text += "pre: " + p + "\n";
    for (const auto& p : card.postconditions) text += "post: " + p + "\n";
    for (const auto& knob : card.config_knobs)
        text += "knob: " + knob.name + " default=" + knob.default_value +
                " range=" + knob.range + "\n";
    for (const auto& api : card.referenced_apis) text += "ref: " + api + "\n";
    doc.text = std::move(text);
    return doc;
}

IndexedDoc doc_from_snippet(const graph::CodeGraph& graph, graph::NodeId id,
                            const fs::path& repo_root, size_t max_bytes) {
    IndexedDoc doc;
    doc.doc_id = md5("snippet:" + id.to_hex());
    doc.source = Source::Snippet;
    doc.subject = id;
    doc.domain_tags = tags_for_node(graph, id);
    const graph::GraphNode* node = graph.find(id);
    if (node) {
        std::string content;
        try {
            content = read_file(repo_root / node->path);
        } catch (const IoError&) {
        }
        if (node->span.start < content.size()) {
            size_t len = std::min<size_t>(node->span.end, content.size()) - node->span.start;
            doc.text = node->qualified_name + "\n" +
                       content.substr(node->span.start, std::min(len, max_bytes));
        } else {
            doc.text = node->qualified_name;
        }
    }
    return doc;
}

std::vector<IndexedDoc> literature_from_dir(const fs::path& dir) {
    std::vector<IndexedDoc> docs;
    if (!fs::exists(dir)) return docs;
    for (const auto& rel : list_files_recursive(dir)) {
        if (rel.size() >= 5 && rel.compare(rel.size() - 5, 5, ".tags") == 0) continue;
        IndexedDoc doc;
        doc.doc_id = md5("lit:" + rel);
        doc.source = Source::Literature;
        doc.text = read_file(dir / rel);
        std::string stem = rel;
        if (size_t dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
        fs::path sidecar = dir / (stem + ".tags");
        if (!fs::exists(sidecar)) sidecar = dir / (rel + ".tags");
        if (fs::exists(sidecar)) {
            std::string tags = read_file(sidecar);
            std::string current;
            for (char c : tags + ",") {
                if (c == ',' || c == '\n') {
                    size_t a = current.find_first_not_of(" \t\r");
                    size_t b = current.find_last_not_of(" \t\r");
                    if (a != std::string::npos)
                        doc.domain_tags.insert(current.substr(a, b - a + 1));
                    current.clear();
                } else {
                    current += c;
                }
            }
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace qorpilot::retrieval
