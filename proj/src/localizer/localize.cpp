#include <algorithm>

#include "qorpilot/localizer/localizer.hpp"

namespace qorpilot::localizer {

namespace {

using graph::CodeGraph;
using graph::EdgeKind;
using graph::GraphNode;
using graph::NodeKind;

// undirected degree on the calls/script_invokes projection
std::map<NodeId, double> degree_map(const CodeGraph& graph) {
    std::map<NodeId, double> degree;
    for (const auto& e : graph.edges) {
        if (e.kind != EdgeKind::Calls && e.kind != EdgeKind::ScriptInvokes) continue;
        degree[e.src] += 1.0;
        degree[e.dst] += 1.0;
    }
    return degree;
}

}  // namespace

EditSurface localize(const planner::HighLevelPlan& plan, const CodeGraph& graph,
                     const std::map<std::string, double>* change_freq,
                     const LocalizeOptions& options) {
    // candidate entity nodes per intervention
    std::vector<std::vector<const GraphNode*>> candidates(plan.interventions.size());
    for (size_t i = 0; i < plan.interventions.size(); ++i) {
        const auto& target = plan.interventions[i].target_api;
        auto nodes = planner::resolve_api(graph, target);
        // definitions and groups are edit surfaces; bare declarations are not
        std::vector<const GraphNode*> editable;
        for (const auto* n : nodes)
            if (n->kind == NodeKind::Definition || n->kind == NodeKind::SccGroup)
                editable.push_back(n);
        if (editable.empty() && !nodes.empty()) editable = nodes;  // declarations only
        if (editable.empty()) throw UnknownApi("no node implements " + target);
        if (editable.size() > options.ambiguous_cap)
            throw AmbiguousTarget(target + " matches " + std::to_string(editable.size()) +
                                  " nodes (cap " + std::to_string(options.ambiguous_cap) + ")");
        std::sort(editable.begin(), editable.end(),
                  [](const GraphNode* a, const GraphNode* b) { return a->id < b->id; });
        candidates[i] = std::move(editable);
    }

    // greedy set cover: nodes covering the most uncovered interventions first
    std::map<NodeId, std::set<size_t>> covers;
    for (size_t i = 0; i < candidates.size(); ++i)
        for (const auto* n : candidates[i]) covers[n->id].insert(i);

    std::set<size_t> uncovered;
    for (size_t i = 0; i < candidates.size(); ++i) uncovered.insert(i);

    EditSurface surface;
    while (!uncovered.empty()) {
        NodeId best{};
        size_t best_gain = 0;
        for (const auto& [id, set] : covers) {
            size_t gain = 0;
            for (size_t i : set)
                if (uncovered.count(i)) ++gain;
            if (gain > best_gain || (gain == best_gain && gain > 0 && id < best)) {
                best_gain = gain;
                best = id;
            }
        }
        if (best_gain == 0) break;  // unreachable: every intervention has candidates
        surface.covering_nodes.insert(best);
        for (size_t i : covers.at(best)) {
            if (uncovered.erase(i)) surface.coverage[i].insert(best);
        }
    }

    // add defining File nodes and collect file paths
    std::set<NodeId> entity_nodes = surface.covering_nodes;
    for (NodeId id : entity_nodes) {
        const GraphNode* node = graph.find(id);
        if (!node) continue;
        surface.files.insert(node->path);
        if (const GraphNode* file = graph.file_node(node->path))
            surface.covering_nodes.insert(file->id);
    }

    // blast radius: normalized degree + normalized change frequency
    auto degrees = degree_map(graph);
    double max_degree = 0;
    for (const auto& [id, d] : degrees) max_degree = std::max(max_degree, d);
    double max_freq = 0;
    if (change_freq)
        for (const auto& [path, count] : *change_freq) max_freq = std::max(max_freq, count);

    for (NodeId id : surface.covering_nodes) {
        const GraphNode* node = graph.find(id);
        if (!node) continue;
        double deg = degrees.count(id) ? degrees.at(id) : 0.0;
        double norm_degree = max_degree > 0 ? deg / max_degree : 0.0;
        double norm_freq = 0.0;
        if (change_freq && max_freq > 0) {
            auto it = change_freq->find(node->path);
            if (it != change_freq->end()) norm_freq = it->second / max_freq;
        }
        double score = options.degree_weight * norm_degree;
        if (change_freq) score += options.change_freq_weight * norm_freq;
        surface.node_blast[id] = score;
        surface.blast_radius += score;
    }
    return surface;
}

}  // namespace qorpilot::localizer
