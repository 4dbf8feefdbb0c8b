#include <algorithm>
#include <unordered_map>

#include "qorpilot/support/glob.hpp"
#include "qorpilot/graph/codegraph.hpp"

namespace qorpilot::graph {

namespace {

// Iterative Tarjan over the calls projection.
std::vector<std::vector<NodeId>> strongly_connected_components(const CodeGraph& graph) {
    std::vector<NodeId> order;  // stable node ordering
    std::unordered_map<NodeId, size_t> idx_of;
    for (const auto& [id, node] : graph.nodes) {
        idx_of.emplace(id, order.size());
        order.push_back(id);
    }
    std::vector<std::vector<size_t>> adj(order.size());
    for (const auto& e : graph.edges) {
        if (e.kind != EdgeKind::Calls) continue;
        adj[idx_of.at(e.src)].push_back(idx_of.at(e.dst));
    }

    const size_t n = order.size();
    std::vector<int> index(n, -1), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<size_t> stack;
    std::vector<std::vector<NodeId>> sccs;
    int counter = 0;

    struct Frame {
        size_t v;
        size_t child = 0;
    };
    for (size_t start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        std::vector<Frame> frames{{start}};
        index[start] = lowlink[start] = counter++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < adj[f.v].size()) {
                size_t w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = lowlink[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w});
                } else if (on_stack[w]) {
                    lowlink[f.v] = std::min(lowlink[f.v], index[w]);
                }
            } else {
                if (lowlink[f.v] == index[f.v]) {
                    std::vector<NodeId> scc;
                    while (true) {
                        size_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        scc.push_back(order[w]);
                        if (w == f.v) break;
                    }
                    sccs.push_back(std::move(scc));
                }
                size_t v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[v]);
            }
        }
    }
    return sccs;
}

}  // namespace

CodeGraph condense_sccs(const CodeGraph& graph) {
    if (graph.condensed) throw AlreadyCondensed("graph is already condensed");

    // self-calling singles also condense, so collect self-loop sources
    std::set<NodeId> self_callers;
    for (const auto& e : graph.edges)
        if (e.kind == EdgeKind::Calls && e.src == e.dst) self_callers.insert(e.src);

    auto sccs = strongly_connected_components(graph);

    CodeGraph out;
    out.repo_fingerprint = graph.repo_fingerprint;
    out.condensed = true;
    auto context = graph.context ? std::make_shared<BuildContext>(*graph.context)
                                 : std::make_shared<BuildContext>();

    std::unordered_map<NodeId, NodeId> remap;  // member -> group
    for (auto& scc : sccs) {
        if (scc.size() < 2 && !self_callers.count(scc[0])) continue;
        std::sort(scc.begin(), scc.end());
        const GraphNode& rep = graph.nodes.at(scc[0]);
        GraphNode group;
        group.kind = NodeKind::SccGroup;
        group.language = rep.language;
        group.path = rep.path;
        group.span = rep.span;
        group.qualified_name = "scc:" + rep.qualified_name;
        group.members = scc;
        group.id = make_node_id(group.path, NodeKind::SccGroup, group.qualified_name,
                                group.span.start);
        group.signature = rep.signature;
        for (NodeId member : scc) {
            remap[member] = group.id;
            context->retired.emplace(member, graph.nodes.at(member));
        }
        out.nodes.emplace(group.id, std::move(group));
    }

    for (const auto& [id, node] : graph.nodes)
        if (!remap.count(id)) out.nodes.emplace(id, node);

    for (const auto& e : graph.edges) {
        auto s = remap.find(e.src);
        auto d = remap.find(e.dst);
        NodeId src = s == remap.end() ? e.src : s->second;
        NodeId dst = d == remap.end() ? e.dst : d->second;
        if (src == dst && (s != remap.end() || d != remap.end())) continue;  // internal
        if (e.kind == EdgeKind::Calls && src == dst) continue;  // keep projection acyclic
        out.edges.push_back({src, dst, e.kind, e.weight});
    }
    out.canonicalize_edges();
    out.context = std::move(context);
    return out;
}

CodeGraph sparsify(const CodeGraph& graph, size_t max_out_degree, double min_weight) {
    if (!graph.condensed) throw NotCondensed("sparsify requires a condensed graph");

    CodeGraph out = graph;
    out.edges.clear();

    // group by (src, kind); contains edges pass through untouched
    std::map<std::pair<NodeId, EdgeKind>, std::vector<GraphEdge>> buckets;
    for (const auto& e : graph.edges) {
        if (e.kind == EdgeKind::Contains) {
            out.edges.push_back(e);
            continue;
        }
        buckets[{e.src, e.kind}].push_back(e);
    }
    for (auto& [key, bucket] : buckets) {
        std::sort(bucket.begin(), bucket.end(), [](const GraphEdge& a, const GraphEdge& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.dst < b.dst;
        });
        size_t kept = 0;
        for (const auto& e : bucket) {
            if (kept >= max_out_degree) break;
            if (e.weight < min_weight) break;  // sorted by weight desc
            out.edges.push_back(e);
            ++kept;
        }
    }
    out.canonicalize_edges();
    return out;
}

CodeGraph filter_nodes(const CodeGraph& graph, const std::vector<std::string>& exclusion_globs,
                       FilterDiagnostics* diagnostics) {
    for (const auto& pattern : exclusion_globs) validate_glob(pattern);

    FilterDiagnostics local;
    FilterDiagnostics* diag = diagnostics ? diagnostics : &local;
    diag->removed_per_pattern.clear();
    for (const auto& pattern : exclusion_globs) diag->removed_per_pattern.emplace_back(pattern, 0);

    CodeGraph out;
    out.repo_fingerprint = graph.repo_fingerprint;
    out.condensed = graph.condensed;

    std::set<NodeId> removed;
    for (const auto& [id, node] : graph.nodes) {
        bool drop = false;
        for (size_t p = 0; p < exclusion_globs.size(); ++p) {
            if (glob_match(exclusion_globs[p], node.path)) {
                ++diag->removed_per_pattern[p].second;
                drop = true;
                break;
            }
        }
        if (drop) removed.insert(id);
        else out.nodes.emplace(id, node);
    }
    for (const auto& e : graph.edges)
        if (!removed.count(e.src) && !removed.count(e.dst)) out.edges.push_back(e);

    if (graph.context) {
        auto context = std::make_shared<BuildContext>(*graph.context);
        for (auto it = context->files.begin(); it != context->files.end();) {
            bool drop = false;
            for (const auto& pattern : exclusion_globs)
                if (glob_match(pattern, it->first)) drop = true;
            it = drop ? context->files.erase(it) : std::next(it);
        }
        out.context = std::move(context);
    }
    out.canonicalize_edges();
    return out;
}

}  // namespace qorpilot::graph
