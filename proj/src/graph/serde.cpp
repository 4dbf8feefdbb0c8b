#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/graph/codegraph.hpp"

namespace qorpilot::graph {

std::string serialize(const CodeGraph& graph) {
    Json root;
    root["version"] = 1;
    root["repo_fingerprint"] = graph.repo_fingerprint;
    root["condensed"] = graph.condensed;

    Json nodes = Json::array();
    for (const auto& [id, node] : graph.nodes) {
        Json n;
        n["id"] = id.to_hex();
        n["kind"] = node_kind_name(node.kind);
        n["language"] = syntax::language_name(node.language);
        n["path"] = node.path;
        n["span"] = Json::array({node.span.start, node.span.end});
        n["qualified_name"] = node.qualified_name;
        n["signature"] = node.signature ? Json(*node.signature) : Json(nullptr);
        Json members = Json::array();
        for (const auto& m : node.members) members.push_back(m.to_hex());
        n["members"] = std::move(members);
        nodes.push_back(std::move(n));
    }
    root["nodes"] = std::move(nodes);

    Json edges = Json::array();
    for (const auto& e : graph.edges) {
        Json je;
        je["src"] = e.src.to_hex();
        je["dst"] = e.dst.to_hex();
        je["kind"] = edge_kind_name(e.kind);
        je["weight"] = e.weight;
        edges.push_back(std::move(je));
    }
    root["edges"] = std::move(edges);
    return canonical_dump(root);
}

namespace {

NodeId parse_id(const Json& j, const char* what) {
    if (!j.is_string()) throw MalformedGraphFile(std::string(what) + ": id is not a string");
    auto id = Hash128::from_hex(j.get<std::string>());
    if (!id) throw MalformedGraphFile(std::string(what) + ": bad id hex");
    return *id;
}

}  // namespace

CodeGraph deserialize(std::string_view bytes) {
    Json root;
    try {
        root = Json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedGraphFile(std::string("graph file: ") + e.what() + " (byte " +
                                 std::to_string(e.byte) + ")");
    }
    try {
        if (!root.is_object() || root.value("version", 0) != 1)
            throw MalformedGraphFile("graph file: missing or unsupported version");
        CodeGraph graph;
        graph.repo_fingerprint = root.at("repo_fingerprint").get<std::string>();
        graph.condensed = root.at("condensed").get<bool>();
        for (const auto& n : root.at("nodes")) {
            GraphNode node;
            node.id = parse_id(n.at("id"), "node");
            auto kind = node_kind_from(n.at("kind").get<std::string>());
            auto lang = language_from(n.at("language").get<std::string>());
            if (!kind || !lang) throw MalformedGraphFile("graph file: bad node kind/language");
            node.kind = *kind;
            node.language = *lang;
            node.path = n.at("path").get<std::string>();
            const auto& span = n.at("span");
            if (!span.is_array() || span.size() != 2)
                throw MalformedGraphFile("graph file: bad span");
            node.span = {span[0].get<uint32_t>(), span[1].get<uint32_t>()};
            if (node.span.start > node.span.end)
                throw MalformedGraphFile("graph file: inverted span");
            node.qualified_name = n.at("qualified_name").get<std::string>();
            if (!n.at("signature").is_null())
                node.signature = n.at("signature").get<std::string>();
            for (const auto& m : n.at("members")) node.members.push_back(parse_id(m, "member"));
            if ((node.kind == NodeKind::SccGroup) != !node.members.empty())
                throw MalformedGraphFile("graph file: members only valid on SccGroup nodes");
            if (!graph.nodes.emplace(node.id, node).second)
                throw MalformedGraphFile("graph file: duplicate node id " + node.id.to_hex());
        }
        for (const auto& je : root.at("edges")) {
            GraphEdge e;
            e.src = parse_id(je.at("src"), "edge src");
            e.dst = parse_id(je.at("dst"), "edge dst");
            auto kind = edge_kind_from(je.at("kind").get<std::string>());
            if (!kind) throw MalformedGraphFile("graph file: bad edge kind");
            e.kind = *kind;
            e.weight = je.at("weight").get<double>();
            if (e.weight < 0) throw MalformedGraphFile("graph file: negative edge weight");
            if (!graph.nodes.count(e.src) || !graph.nodes.count(e.dst))
                throw MalformedGraphFile("graph file: edge endpoint not in node set");
            graph.edges.push_back(e);
        }
        graph.canonicalize_edges();
        return graph;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedGraphFile(std::string("graph file: ") + e.what());
    }
}

}  // namespace qorpilot::graph
