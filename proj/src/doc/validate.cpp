#include <algorithm>

#include "qorpilot/doc/docmaker.hpp"
#include "sig_util.hpp"

namespace qorpilot::doc {

std::string_view violation_kind_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::ApiMissing: return "ApiMissing";
        case ViolationKind::EmptyRole: return "EmptyRole";
        case ViolationKind::UnknownKnob: return "UnknownKnob";
        case ViolationKind::ArityMismatch: return "ArityMismatch";
    }
    return "ApiMissing";
}

std::vector<Violation> validate_card(const DocCard& card, const CodeGraph& graph,
                                     const EvidenceBundle* evidence) {
    std::vector<Violation> violations;

    if (card.role.empty())
        violations.push_back({ViolationKind::EmptyRole, "card role is empty"});

    for (const auto& api : card.referenced_apis) {
        if (graph.by_qualified_name(api).empty())
            violations.push_back(
                {ViolationKind::ApiMissing, "referenced API not in graph: " + api});
    }

    if (evidence) {
        std::vector<std::string> known;
        for (const auto& f : evidence->config_flags) known.push_back(f.name);
        for (const auto& [name, value] : evidence->default_params) known.push_back(name);
        for (const auto& knob : card.config_knobs) {
            if (std::find(known.begin(), known.end(), knob.name) == known.end())
                violations.push_back({ViolationKind::UnknownKnob,
                                      "knob matches no extracted flag: " + knob.name});
        }
    }

    const graph::GraphNode* node = graph.find(card.subject);
    if (node && node->signature && !node->signature->empty() &&
        (node->kind == graph::NodeKind::Definition ||
         node->kind == graph::NodeKind::Declaration)) {
        size_t sig_arity = detail::split_signature_params(*node->signature).size();
        size_t card_arity = 0;
        for (const auto& io : card.inputs_outputs)
            if (io.direction == "in") ++card_arity;
        if (!card.inputs_outputs.empty() && sig_arity != card_arity)
            violations.push_back(
                {ViolationKind::ArityMismatch,
                 "card lists " + std::to_string(card_arity) + " inputs but signature has " +
                     std::to_string(sig_arity) + " parameters"});
    }
    return violations;
}

}  // namespace qorpilot::doc
