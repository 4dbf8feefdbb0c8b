#include <cctype>

#include "qorpilot/support/glob.hpp"
#include "builder.hpp"

namespace qorpilot::graph {

namespace {

// "detailed_place" or {detailed_place} -> detailed_place; nullopt otherwise.
std::optional<std::string> literal_string(const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        return raw.substr(1, raw.size() - 2);
    if (raw.size() >= 2 && raw.front() == '{' && raw.back() == '}')
        return raw.substr(1, raw.size() - 2);
    return std::nullopt;
}

bool plain_identifier(const std::string& raw) {
    if (raw.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(raw[0])) || raw[0] == '_')) return false;
    for (char c : raw) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':') continue;
        return false;
    }
    return true;
}

}  // namespace

std::vector<RegistrationPattern> default_registration_patterns() {
    return {
        {"Tcl_CreateCommand", 1},
        {"Tcl_CreateObjCommand", 1},
        {"register_cmd", 0},
        {"registerCommand", 0},
    };
}

CodeGraph link_scripts(const CodeGraph& graph, const std::vector<RegistrationPattern>& patterns,
                       LinkTally* tally) {
    if (graph.condensed)
        throw AlreadyCondensed("link_scripts requires an uncondensed graph");
    if (!graph.context)
        throw Error("link_scripts requires a graph with build context (built in-process)");

    LinkTally local;
    LinkTally* t = tally ? tally : &local;

    // command name -> handler definition, from C/C++ registration callsites
    std::map<std::string, NodeId> registry;
    for (const auto& [path, facts] : graph.context->files) {
        if (facts.lang != Language::C && facts.lang != Language::Cpp) continue;
        for (const auto& fact : facts.calls) {
            if (fact.binds) continue;
            const RegistrationPattern* matched = nullptr;
            for (const auto& pat : patterns) {
                if (glob_match(pat.name_pattern, fact.callee)) {
                    matched = &pat;
                    break;
                }
            }
            if (!matched) continue;
            ++t->registrations;
            if (fact.args.size() <= matched->string_arg_pos) {
                ++t->skipped_nonliteral;
                continue;
            }
            auto command = literal_string(fact.args[matched->string_arg_pos]);
            if (!command) {
                ++t->skipped_nonliteral;
                continue;
            }
            // handler: first other argument that names a known definition
            const GraphNode* handler = nullptr;
            for (size_t i = 0; i < fact.args.size() && !handler; ++i) {
                if (i == matched->string_arg_pos) continue;
                std::string arg = fact.args[i];
                if (!arg.empty() && arg[0] == '&') arg = arg.substr(1);
                if (!plain_identifier(arg)) continue;
                std::string suffix = "::" + arg;
                for (const auto& [id, node] : graph.nodes) {
                    if (node.kind != NodeKind::Definition) continue;
                    if (node.language != Language::C && node.language != Language::Cpp) continue;
                    const std::string& q = node.qualified_name;
                    if (q == arg || (q.size() > suffix.size() &&
                                     q.compare(q.size() - suffix.size(), suffix.size(),
                                               suffix) == 0)) {
                        handler = &node;
                        break;
                    }
                }
            }
            if (!handler) {
                ++t->unmatched;
                continue;
            }
            registry.emplace(*command, handler->id);
        }
    }

    CodeGraph out = graph;
    if (registry.empty()) {
        out.canonicalize_edges();
        return out;
    }

    // script callsites invoking a registered token
    for (const auto& [path, facts] : graph.context->files) {
        if (facts.lang != Language::Tcl && facts.lang != Language::Python) continue;
        for (const auto& fact : facts.calls) {
            if (fact.binds) continue;
            auto hit = registry.find(fact.callee);
            if (hit == registry.end()) continue;
            if (!out.nodes.count(fact.site) || !out.nodes.count(hit->second)) continue;
            out.edges.push_back({fact.site, hit->second, EdgeKind::ScriptInvokes, 1.0});
            ++t->edges_added;
        }
    }
    out.canonicalize_edges();
    return out;
}

}  // namespace qorpilot::graph
