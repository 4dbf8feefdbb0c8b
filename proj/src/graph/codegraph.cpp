#include "qorpilot/graph/codegraph.hpp"

#include <algorithm>

namespace qorpilot::graph {

std::string_view node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::File: return "File";
        case NodeKind::Declaration: return "Declaration";
        case NodeKind::Definition: return "Definition";
        case NodeKind::Callsite: return "Callsite";
        case NodeKind::SccGroup: return "SccGroup";
    }
    return "File";
}

std::optional<NodeKind> node_kind_from(std::string_view name) {
    if (name == "File") return NodeKind::File;
    if (name == "Declaration") return NodeKind::Declaration;
    if (name == "Definition") return NodeKind::Definition;
    if (name == "Callsite") return NodeKind::Callsite;
    if (name == "SccGroup") return NodeKind::SccGroup;
    return std::nullopt;
}

std::optional<Language> language_from(std::string_view name) {
    if (name == "C") return Language::C;
    if (name == "Cpp") return Language::Cpp;
    if (name == "Tcl") return Language::Tcl;
    if (name == "Python") return Language::Python;
    if (name == "Verilog") return Language::Verilog;
    if (name == "Other") return Language::Other;
    return std::nullopt;
}

std::string_view edge_kind_name(EdgeKind k) {
    switch (k) {
        case EdgeKind::Calls: return "calls";
        case EdgeKind::Includes: return "includes";
        case EdgeKind::Imports: return "imports";
        case EdgeKind::Binds: return "binds";
        case EdgeKind::Contains: return "contains";
        case EdgeKind::ScriptInvokes: return "script_invokes";
    }
    return "calls";
}

std::optional<EdgeKind> edge_kind_from(std::string_view name) {
    if (name == "calls") return EdgeKind::Calls;
    if (name == "includes") return EdgeKind::Includes;
    if (name == "imports") return EdgeKind::Imports;
    if (name == "binds") return EdgeKind::Binds;
    if (name == "contains") return EdgeKind::Contains;
    if (name == "script_invokes") return EdgeKind::ScriptInvokes;
    return std::nullopt;
}

NodeId make_node_id(std::string_view path, NodeKind kind, std::string_view qualified_name,
                    uint32_t span_start) {
    Md5 m;
    m.update(path);
    m.update("\0", 1);
    m.update(node_kind_name(kind));
    m.update("\0", 1);
    m.update(qualified_name);
    m.update("\0", 1);
    std::string start = std::to_string(span_start);
    m.update(start);
    return m.digest();
}

const GraphNode* CodeGraph::find(NodeId id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
}

const GraphNode* CodeGraph::file_node(std::string_view path) const {
    for (const auto& [id, node] : nodes)
        if (node.kind == NodeKind::File && node.path == path) return &node;
    return nullptr;
}

std::vector<const GraphNode*> CodeGraph::by_qualified_name(std::string_view name) const {
    std::vector<const GraphNode*> out;
    for (const auto& [id, node] : nodes)
        if (node.qualified_name == name) out.push_back(&node);
    return out;
}

void CodeGraph::canonicalize_edges() {
    std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return std::tie(a.src, a.dst, a.kind, a.weight) < std::tie(b.src, b.dst, b.kind, b.weight);
    });
    std::vector<GraphEdge> merged;
    merged.reserve(edges.size());
    for (const auto& e : edges) {
        if (!merged.empty() && merged.back().src == e.src && merged.back().dst == e.dst &&
            merged.back().kind == e.kind) {
            merged.back().weight += e.weight;
        } else {
            merged.push_back(e);
        }
    }
    edges = std::move(merged);
}

bool CodeGraph::endpoints_closed() const {
    for (const auto& e : edges)
        if (!nodes.count(e.src) || !nodes.count(e.dst)) return false;
    return true;
}

}  // namespace qorpilot::graph
