#include <queue>
#include <unordered_map>

#include "qorpilot/doc/docmaker.hpp"

namespace qorpilot::doc {

std::vector<NodeId> schedule(const CodeGraph& graph) {
    if (!graph.condensed) throw graph::NotCondensed("schedule requires a condensed graph");

    // callees first: a node becomes ready once all its calls targets are out
    std::unordered_map<NodeId, size_t> pending;  // unfinished callees per node
    std::unordered_map<NodeId, std::vector<NodeId>> callers_of;
    for (const auto& [id, node] : graph.nodes) pending.emplace(id, 0);
    for (const auto& e : graph.edges) {
        if (e.kind != graph::EdgeKind::Calls) continue;
        pending[e.src] += 1;
        callers_of[e.dst].push_back(e.src);
    }

    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> ready;
    for (const auto& [id, count] : pending)
        if (count == 0) ready.push(id);

    std::vector<NodeId> order;
    order.reserve(graph.nodes.size());
    while (!ready.empty()) {
        NodeId id = ready.top();
        ready.pop();
        order.push_back(id);
        auto it = callers_of.find(id);
        if (it == callers_of.end()) continue;
        for (NodeId caller : it->second)
            if (--pending[caller] == 0) ready.push(caller);
    }
    if (order.size() != graph.nodes.size())
        throw Error("calls projection is cyclic despite condensed flag");
    return order;
}

}  // namespace qorpilot::doc
