#include <thread>
#include <unordered_map>

#include "qorpilot/doc/docmaker.hpp"

namespace qorpilot::doc {

bool card_bearing(graph::NodeKind kind) {
    return kind == graph::NodeKind::File || kind == graph::NodeKind::Declaration ||
           kind == graph::NodeKind::Definition || kind == graph::NodeKind::SccGroup;
}

std::set<NodeId> map_to_condensed(const CodeGraph& condensed, const std::set<NodeId>& dirty) {
    std::set<NodeId> out;
    std::map<NodeId, NodeId> member_to_group;
    for (const auto& [id, node] : condensed.nodes)
        if (node.kind == graph::NodeKind::SccGroup)
            for (NodeId member : node.members) member_to_group.emplace(member, id);
    for (NodeId id : dirty) {
        if (condensed.nodes.count(id)) {
            out.insert(id);
            continue;
        }
        auto it = member_to_group.find(id);
        if (it != member_to_group.end()) out.insert(it->second);
    }
    return out;
}

namespace {

// depth = 1 + max depth over calls successors; leaves sit at depth 0
std::unordered_map<NodeId, size_t> schedule_depths(const CodeGraph& graph,
                                                   const std::vector<NodeId>& order) {
    std::unordered_map<NodeId, std::vector<NodeId>> callees;
    for (const auto& e : graph.edges)
        if (e.kind == graph::EdgeKind::Calls) callees[e.src].push_back(e.dst);
    std::unordered_map<NodeId, size_t> depth;
    for (NodeId id : order) {  // callees precede callers in the schedule
        size_t d = 0;
        auto it = callees.find(id);
        if (it != callees.end())
            for (NodeId callee : it->second) d = std::max(d, depth.at(callee) + 1);
        depth[id] = d;
    }
    return depth;
}

struct NodeTask {
    NodeId id;
    CardSubject subject;
    EvidenceBundle evidence;
    DocCard card;            // filled by the synthesis phase
    std::string synth_error; // non-empty when synthesis threw
};

}  // namespace

DocmakerResult run_docmaker(const CodeGraph& graph, const std::filesystem::path& repo_root,
                            CardStore& store, Synthesizer& synthesizer,
                            const std::set<NodeId>* subset, const DocmakerOptions& options) {
    DocmakerResult result;
    auto order = schedule(graph);
    auto depths = schedule_depths(graph, order);

    // layers in schedule order; the schedule already groups monotone depths,
    // but subsets can skip around, so group explicitly
    std::map<size_t, std::vector<NodeId>> layers;
    for (NodeId id : order) {
        const graph::GraphNode* node = graph.find(id);
        if (!node || !card_bearing(node->kind)) continue;
        if (subset && !subset->count(id)) continue;
        layers[depths.at(id)].push_back(id);
    }

    size_t in_flight = std::max<size_t>(1, options.max_in_flight);

    for (auto& [depth, ids] : layers) {
        // extract sequentially: needs cards from earlier depths only
        std::vector<NodeTask> tasks;
        tasks.reserve(ids.size());
        for (NodeId id : ids) {
            NodeTask task;
            task.id = id;
            task.subject = card_subject(graph, id);
            task.evidence = extract_evidence(graph, id, store, repo_root);
            tasks.push_back(std::move(task));
        }

        // synthesize concurrently, at most `in_flight` at a time
        auto synthesize_one = [&](NodeTask& task) {
            try {
                task.card = synthesize_card(task.evidence, synthesizer, task.subject);
            } catch (const Error& e) {
                task.synth_error = e.what();
            }
        };
        if (in_flight == 1 || tasks.size() <= 1) {
            for (auto& task : tasks) synthesize_one(task);
        } else {
            for (size_t begin = 0; begin < tasks.size(); begin += in_flight) {
                size_t end = std::min(tasks.size(), begin + in_flight);
                std::vector<std::thread> pool;
                for (size_t i = begin; i < end; ++i)
                    pool.emplace_back([&, i] { synthesize_one(tasks[i]); });
                for (auto& t : pool) t.join();
            }
        }

        // validate, retry once, store: deterministic join in layer order
        for (auto& task : tasks) {
            if (!task.synth_error.empty()) {
                result.failed.emplace_back(task.id, task.synth_error);
                continue;
            }
            auto violations = validate_card(task.card, graph, &task.evidence);
            if (!violations.empty()) {
                ++result.resynthesized;
                EvidenceBundle amended = task.evidence;
                for (const auto& v : violations)
                    amended.error_messages.push_back("validator: " + v.message);
                try {
                    task.card = synthesize_card(amended, synthesizer, task.subject);
                    task.card.evidence_checksum = evidence_checksum(task.evidence);
                } catch (const Error& e) {
                    result.failed.emplace_back(task.id, e.what());
                    continue;
                }
                violations = validate_card(task.card, graph, &task.evidence);
                if (!violations.empty()) {
                    std::string detail;
                    for (const auto& v : violations) {
                        if (!detail.empty()) detail += "; ";
                        detail += std::string(violation_kind_name(v.kind)) + ": " + v.message;
                    }
                    result.failed.emplace_back(task.id, detail);
                    continue;
                }
            }
            store.put(std::move(task.card));
            ++result.cards_written;
        }
    }
    return result;
}

}  // namespace qorpilot::doc
