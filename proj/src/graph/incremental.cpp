#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "qorpilot/support/fsutil.hpp"
#include "builder.hpp"

namespace fs = std::filesystem;

namespace qorpilot::graph {

namespace {

// Nodes reachable from `seeds` within `max_hops` reversed calls/script_invokes
// hops ("who depends on these").
std::set<NodeId> reverse_reach(const CodeGraph& graph, const std::set<NodeId>& seeds,
                               int max_hops) {
    std::unordered_map<NodeId, std::vector<NodeId>> reverse_adj;
    for (const auto& e : graph.edges) {
        if (e.kind != EdgeKind::Calls && e.kind != EdgeKind::ScriptInvokes) continue;
        reverse_adj[e.dst].push_back(e.src);
    }
    std::set<NodeId> seen = seeds;
    std::vector<NodeId> frontier(seeds.begin(), seeds.end());
    for (int hop = 0; hop < max_hops && !frontier.empty(); ++hop) {
        std::vector<NodeId> next;
        for (NodeId id : frontier) {
            auto it = reverse_adj.find(id);
            if (it == reverse_adj.end()) continue;
            for (NodeId pred : it->second)
                if (seen.insert(pred).second) next.push_back(pred);
        }
        frontier = std::move(next);
    }
    return seen;
}

constexpr int kDirtyHops = 2;

}  // namespace

IncrementalResult incremental_update(const CodeGraph& graph,
                                     const std::vector<std::string>& changed_files,
                                     const fs::path& repo_root, const BuildOptions& options) {
    if (graph.condensed)
        throw AlreadyCondensed("incremental_update applies to the build-stage graph");

    std::set<std::string> changed(changed_files.begin(), changed_files.end());
    for (const auto& rel : changed) {
        bool indexed = graph.file_node(rel) != nullptr;
        bool exists = fs::exists(repo_root / rel);
        if (!indexed && !exists)
            throw UnknownFile(rel + " was never indexed and does not exist");
    }

    if (changed.empty()) return {graph, {}};

    // seeds in the old graph (nodes of changed files before the edit)
    std::set<NodeId> old_seeds;
    for (const auto& [id, node] : graph.nodes)
        if (changed.count(node.path)) old_seeds.insert(id);
    std::set<NodeId> old_dirty = reverse_reach(graph, old_seeds, kDirtyHops);

    CodeGraph out;
    out.condensed = false;
    auto context = std::make_shared<BuildContext>();

    // untouched nodes are reused bit-identically
    for (const auto& [id, node] : graph.nodes)
        if (!changed.count(node.path)) out.nodes.emplace(id, node);

    // facts for unchanged files: reuse, else re-derive from disk
    std::set<std::string> unchanged_paths;
    for (const auto& [id, node] : graph.nodes)
        if (node.kind == NodeKind::File && !changed.count(node.path))
            unchanged_paths.insert(node.path);
    for (const auto& rel : unchanged_paths) {
        if (graph.context) {
            auto it = graph.context->files.find(rel);
            if (it != graph.context->files.end()) {
                context->files.emplace(rel, it->second);
                continue;
            }
        }
        auto derived = detail::derive_file(rel, read_file(repo_root / rel));
        context->files.emplace(rel, std::move(derived.facts));
    }

    // changed files: re-derive nodes + facts from current contents
    std::set<NodeId> new_seeds;
    for (const auto& rel : changed) {
        if (!fs::exists(repo_root / rel)) continue;  // deleted
        std::string bytes = read_file(repo_root / rel);
        if (!is_valid_utf8(bytes) || syntax::language_for_path(rel) == Language::Other) continue;
        auto derived = detail::derive_file(rel, bytes);
        for (auto& node : derived.nodes) {
            new_seeds.insert(node.id);
            out.nodes.emplace(node.id, std::move(node));
        }
        context->files.emplace(rel, std::move(derived.facts));
    }

    if (context->files.empty())
        throw EmptyRepository("update removed every parseable file");

    out.edges = detail::resolve_edges(out.nodes, context->files, options, nullptr);
    out.canonicalize_edges();
    out.repo_fingerprint = detail::fingerprint_files(context->files);
    out.context = std::move(context);

    std::set<NodeId> dirty = reverse_reach(out, new_seeds, kDirtyHops);
    for (NodeId id : old_dirty)
        if (out.nodes.count(id)) dirty.insert(id);

    return {std::move(out), std::move(dirty)};
}

}  // namespace qorpilot::graph
