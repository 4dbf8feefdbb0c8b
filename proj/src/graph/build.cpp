#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "qorpilot/support/fsutil.hpp"
#include "builder.hpp"

namespace fs = std::filesystem;

namespace qorpilot::graph::detail {

namespace {

using syntax::SyntaxNode;

struct FileWalker {
    const std::string& path;
    Language lang;
    NodeId file_id;
    FileDerivation& out;

    void add_node(GraphNode node) {
        // identical (path, kind, name, span.start) collapse to one node, e.g.
        // two same-name calls whose spans share a start line
        for (auto& existing : out.nodes)
            if (existing.id == node.id) return;
        out.nodes.push_back(std::move(node));
    }

    GraphNode make(NodeKind kind, const SyntaxNode& sn, std::string qualified) {
        GraphNode node;
        node.kind = kind;
        node.language = lang;
        node.path = path;
        node.span = sn.span;
        node.qualified_name = std::move(qualified);
        node.id = make_node_id(path, kind, node.qualified_name, sn.span.start);
        return node;
    }

    void walk(const SyntaxNode& sn, NodeId encl, bool at_root) {
        if (sn.kind == "ERROR") {
            ++out.parse_errors;
            return;
        }
        if (sn.kind == "function_definition" || sn.kind == "procedure") {
            GraphNode node = make(NodeKind::Definition, sn, sn.name);
            if (sn.kind == "procedure")
                node.signature = "proc " + sn.name + " {" + sn.detail + "}";
            else if (!sn.detail.empty())
                node.signature = sn.detail;
            NodeId def_id = node.id;
            add_node(std::move(node));
            for (const auto& child : sn.children) walk(child, def_id, false);
            return;
        }
        if (sn.kind == "function_declaration" || sn.kind == "class_specifier" ||
            sn.kind == "struct_specifier" || sn.kind == "enum_specifier" ||
            sn.kind == "class_definition" || sn.kind == "module_declaration") {
            GraphNode node = make(NodeKind::Declaration, sn, sn.name);
            if (!sn.detail.empty() && sn.kind == "function_declaration")
                node.signature = sn.detail;
            NodeId decl_id = node.id;
            add_node(std::move(node));
            for (const auto& child : sn.children) walk(child, decl_id, false);
            return;
        }
        if (sn.kind == "variable_declaration" ||
            (sn.kind == "variable_assignment" && at_root)) {
            if (sn.name.empty() || sn.name[0] == '$') return;
            GraphNode node = make(NodeKind::Declaration, sn, sn.name);
            out.facts.variables.emplace_back(sn.name, node.id);
            add_node(std::move(node));
            return;
        }
        if (sn.kind == "call_expression" || sn.kind == "command") {
            GraphNode node = make(NodeKind::Callsite, sn, sn.name);
            CallFact fact;
            fact.site = node.id;
            fact.encl = encl;
            fact.callee = sn.name;
            fact.args = sn.args;
            out.facts.calls.push_back(std::move(fact));
            add_node(std::move(node));
            for (const auto& child : sn.children) walk(child, encl, false);
            return;
        }
        if (sn.kind == "preproc_include") {
            bool found = false;
            for (auto& [target, count] : out.facts.includes)
                if (target == sn.detail) {
                    count += 1.0;
                    found = true;
                }
            if (!found) out.facts.includes.emplace_back(sn.detail, 1.0);
            return;
        }
        if (sn.kind == "import_statement") {
            out.facts.imports.push_back(sn.detail);
            return;
        }
        // namespaces and other containers: recurse transparently
        for (const auto& child : sn.children) walk(child, encl, at_root);
    }
};

bool word_boundary(const std::string& text, size_t pos, size_t len) {
    auto is_word = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    if (pos > 0 && is_word(text[pos - 1])) return false;
    if (pos + len < text.size() && is_word(text[pos + len])) return false;
    return true;
}

// Occurrences of `name` in text[range], word-bounded ($name also counts).
double count_uses(const std::string& text, Span range, const std::string& name) {
    if (name.empty()) return 0;
    double count = 0;
    size_t pos = range.start;
    size_t end = std::min<size_t>(range.end, text.size());
    while (pos < end) {
        size_t hit = text.find(name, pos);
        if (hit == std::string::npos || hit + name.size() > end) break;
        if (word_boundary(text, hit, name.size())) count += 1.0;
        pos = hit + name.size();
    }
    return count;
}

}  // namespace

FileDerivation derive_file(const std::string& rel_path, const std::string& bytes) {
    FileDerivation out;
    Language lang = syntax::language_for_path(rel_path);
    auto tree = syntax::parse_source(bytes, lang);

    GraphNode file;
    file.kind = NodeKind::File;
    file.language = lang;
    file.path = rel_path;
    file.span = {0, static_cast<uint32_t>(bytes.size())};
    file.qualified_name = rel_path;
    file.id = make_node_id(rel_path, NodeKind::File, rel_path, 0);
    NodeId file_id = file.id;
    out.nodes.push_back(std::move(file));

    out.facts.path = rel_path;
    out.facts.lang = lang;
    out.facts.file_node = file_id;
    out.facts.content_md5 = md5_hex(bytes);

    FileWalker walker{rel_path, lang, file_id, out};
    for (const auto& child : tree.root.children) walker.walk(child, file_id, true);

    // binds: uses of file-scope variables inside definitions of the same file
    if (!out.facts.variables.empty()) {
        size_t considered = 0;
        for (const auto& node : out.nodes) {
            if (node.kind != NodeKind::Definition) continue;
            for (const auto& [name, decl_id] : out.facts.variables) {
                if (considered > 4096) break;
                ++considered;
                double uses = count_uses(bytes, node.span, name);
                if (uses > 0) {
                    CallFact fact;
                    fact.site = decl_id;  // dst
                    fact.encl = node.id;  // src
                    fact.binds = true;
                    fact.weight = uses;
                    out.facts.calls.push_back(std::move(fact));
                }
            }
        }
    }
    return out;
}

namespace {

std::string last_component(const std::string& qualified) {
    size_t pos = qualified.rfind("::");
    if (pos != std::string::npos) return qualified.substr(pos + 2);
    size_t dot = qualified.rfind('.');
    if (dot != std::string::npos) return qualified.substr(dot + 1);
    return qualified;
}

struct DefIndex {
    std::unordered_map<std::string, std::vector<const GraphNode*>> exact;
    std::unordered_map<std::string, std::vector<const GraphNode*>> last;

    explicit DefIndex(const std::map<NodeId, GraphNode>& nodes) {
        for (const auto& [id, node] : nodes) {
            if (node.kind != NodeKind::Definition) continue;
            exact[node.qualified_name].push_back(&node);
            last[last_component(node.qualified_name)].push_back(&node);
        }
    }

    // Deterministic resolution: exact qualified match (same file preferred,
    // then smallest id), else unique-ish last-component match.
    const GraphNode* resolve(const std::string& callee, const std::string& from_path,
                             bool* ambiguous) const {
        if (ambiguous) *ambiguous = false;
        auto pick = [&](const std::vector<const GraphNode*>& cands,
                        bool require_unique) -> const GraphNode* {
            if (cands.empty()) return nullptr;
            const GraphNode* same_path = nullptr;
            for (const auto* c : cands)
                if (c->path == from_path && (!same_path || c->id < same_path->id))
                    same_path = c;
            if (same_path) return same_path;
            if (require_unique && cands.size() > 1) {
                if (ambiguous) *ambiguous = true;
                return nullptr;
            }
            const GraphNode* best = cands[0];
            for (const auto* c : cands)
                if (c->id < best->id) best = c;
            return best;
        };
        if (auto it = exact.find(callee); it != exact.end())
            if (const GraphNode* hit = pick(it->second, false)) return hit;
        if (auto it = last.find(last_component(callee)); it != last.end())
            return pick(it->second, true);
        return nullptr;
    }
};

// include/import target -> File node, by metadata dirs then path suffix.
const GraphNode* resolve_path_ref(const std::string& target, const std::string& from_path,
                                  const std::map<std::string, const GraphNode*>& file_by_path,
                                  const BuildOptions& options) {
    if (options.include_dirs) {
        auto dirs = options.include_dirs->find(from_path);
        if (dirs != options.include_dirs->end()) {
            for (const auto& dir : dirs->second) {
                std::string candidate =
                    dir.empty() ? target : (fs::path(dir) / target).lexically_normal().generic_string();
                auto hit = file_by_path.find(candidate);
                if (hit != file_by_path.end()) return hit->second;
            }
        }
    }
    // path-string fallback: exact, then suffix, smallest path wins
    auto hit = file_by_path.find(target);
    if (hit != file_by_path.end()) return hit->second;
    const GraphNode* best = nullptr;
    std::string suffix = "/" + target;
    for (const auto& [path, node] : file_by_path) {
        if (path.size() > suffix.size() &&
            path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
            if (!best || path < best->path) best = node;
        }
    }
    return best;
}

std::string python_module_path(const std::string& module) {
    std::string p = module;
    std::replace(p.begin(), p.end(), '.', '/');
    return p + ".py";
}

}  // namespace

std::vector<GraphEdge> resolve_edges(const std::map<NodeId, GraphNode>& nodes,
                                     const std::map<std::string, FileFacts>& files,
                                     const BuildOptions& options,
                                     BuildDiagnostics* diagnostics) {
    std::vector<GraphEdge> edges;
    DefIndex defs(nodes);

    std::map<std::string, const GraphNode*> file_by_path;
    for (const auto& [id, node] : nodes)
        if (node.kind == NodeKind::File) file_by_path[node.path] = &node;

    // contains: File -> every node of that file
    for (const auto& [id, node] : nodes) {
        if (node.kind == NodeKind::File) continue;
        auto it = file_by_path.find(node.path);
        if (it != file_by_path.end() && it->second->id != id)
            edges.push_back({it->second->id, id, EdgeKind::Contains, 1.0});
    }

    for (const auto& [path, facts] : files) {
        // calls and binds
        for (const auto& fact : facts.calls) {
            if (fact.binds) {
                if (nodes.count(fact.encl) && nodes.count(fact.site))
                    edges.push_back({fact.encl, fact.site, EdgeKind::Binds, fact.weight});
                continue;
            }
            bool ambiguous = false;
            const GraphNode* target = defs.resolve(fact.callee, path, &ambiguous);
            if (!target) {
                if (diagnostics) {
                    if (ambiguous) ++diagnostics->ambiguous_calls;
                    else ++diagnostics->unresolved_calls;
                }
                continue;
            }
            if (!nodes.count(fact.encl)) continue;
            edges.push_back({fact.encl, target->id, EdgeKind::Calls, 1.0});
        }
        // includes
        for (const auto& [target, count] : facts.includes) {
            const GraphNode* dst = resolve_path_ref(target, path, file_by_path, options);
            if (!dst || dst->path == path) {
                if (diagnostics && (!dst)) ++diagnostics->unresolved_includes;
                continue;
            }
            edges.push_back({facts.file_node, dst->id, EdgeKind::Includes, count});
        }
        // imports
        for (const auto& target : facts.imports) {
            const GraphNode* dst = nullptr;
            if (facts.lang == Language::Python)
                dst = resolve_path_ref(python_module_path(target), path, file_by_path, options);
            else
                dst = resolve_path_ref(target, path, file_by_path, options);
            if (!dst || dst->path == path) {
                if (diagnostics && (!dst)) ++diagnostics->unresolved_imports;
                continue;
            }
            edges.push_back({facts.file_node, dst->id, EdgeKind::Imports, 1.0});
        }
    }
    return edges;
}

std::string fingerprint_files(const std::map<std::string, FileFacts>& files) {
    Md5 m;
    for (const auto& [path, facts] : files) {
        m.update(path);
        m.update("\0", 1);
        m.update(facts.content_md5);
        m.update("\n", 1);
    }
    return m.digest().to_hex();
}

}  // namespace qorpilot::graph::detail

namespace qorpilot::graph {

CodeGraph build_graph(const std::filesystem::path& repo_root, const BuildOptions& options,
                      BuildDiagnostics* diagnostics) {
    auto rel_paths = list_files_recursive(repo_root);

    CodeGraph graph;
    auto context = std::make_shared<BuildContext>();
    BuildDiagnostics local;
    BuildDiagnostics* diag = diagnostics ? diagnostics : &local;

    for (const auto& rel : rel_paths) {
        if (syntax::language_for_path(rel) == Language::Other) continue;
        std::string bytes = read_file(repo_root / rel);
        if (!is_valid_utf8(bytes)) {
            ++diag->files_skipped;
            continue;
        }
        auto derived = detail::derive_file(rel, bytes);
        ++diag->files_parsed;
        diag->parse_errors += derived.parse_errors;
        for (auto& node : derived.nodes) graph.nodes.emplace(node.id, std::move(node));
        context->files.emplace(rel, std::move(derived.facts));
    }

    if (context->files.empty())
        throw EmptyRepository("no parseable source files under " + repo_root.string());

    graph.edges = detail::resolve_edges(graph.nodes, context->files, options, diag);
    graph.canonicalize_edges();
    graph.repo_fingerprint = detail::fingerprint_files(context->files);
    graph.condensed = false;
    graph.context = std::move(context);
    return graph;
}

}  // namespace qorpilot::graph
