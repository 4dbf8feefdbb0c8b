// The repository property graph: typed nodes/edges over a multi-language
// source tree, with cross-language script links, SCC condensation,
// sparsification, path filtering, incremental update and canonical
// serialization.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qorpilot/support/error.hpp"
#include "qorpilot/support/hash.hpp"
#include "qorpilot/syntax/syntax.hpp"

namespace qorpilot::graph {

using syntax::Language;
using syntax::Span;

// Content hash of (path, kind, qualified name, span start): stable across
// runs and hosts, and stable under edits that do not move the entity.
using NodeId = Hash128;

enum class NodeKind { File, Declaration, Definition, Callsite, SccGroup };

std::string_view node_kind_name(NodeKind k);
std::optional<NodeKind> node_kind_from(std::string_view name);
std::optional<Language> language_from(std::string_view name);

enum class EdgeKind { Calls, Includes, Imports, Binds, Contains, ScriptInvokes };

std::string_view edge_kind_name(EdgeKind k);
std::optional<EdgeKind> edge_kind_from(std::string_view name);

struct GraphNode {
    NodeId id;
    NodeKind kind = NodeKind::File;
    Language language = Language::Other;
    std::string path;            // repo-relative, '/'-separated
    Span span;                   // byte range [start, end)
    std::string qualified_name;
    std::optional<std::string> signature;
    std::vector<NodeId> members;  // non-empty iff kind == SccGroup

    bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
    NodeId src;
    NodeId dst;
    EdgeKind kind = EdgeKind::Calls;
    double weight = 1.0;

    bool operator==(const GraphEdge&) const = default;
};

NodeId make_node_id(std::string_view path, NodeKind kind, std::string_view qualified_name,
                    uint32_t span_start);

// --- build context (in-memory only, never serialized) -----------------------

// Reference facts extracted per file; they let cross-file edges be re-resolved
// without re-parsing untouched files.
struct CallFact {
    NodeId site;                    // the Callsite node (binds: the var decl)
    NodeId encl;                    // enclosing Definition, or the File node
    std::string callee;
    std::vector<std::string> args;  // raw argument text
    bool binds = false;             // variable-use fact, not a call
    double weight = 1.0;
};

struct FileFacts {
    std::string path;
    Language lang = Language::Other;
    NodeId file_node;
    std::string content_md5;
    std::vector<CallFact> calls;
    std::vector<std::pair<std::string, double>> includes;  // target -> multiplicity
    std::vector<std::string> imports;
    std::vector<std::pair<std::string, NodeId>> variables;  // file-scope names
};

struct BuildContext {
    std::map<std::string, FileFacts> files;
    // Full nodes of SCC members retired by condensation, for evidence use.
    std::map<NodeId, GraphNode> retired;
};

// --- the graph ---------------------------------------------------------------

struct CodeGraph {
    std::string repo_fingerprint;  // hex
    bool condensed = false;
    std::map<NodeId, GraphNode> nodes;
    std::vector<GraphEdge> edges;  // kept sorted by (src, dst, kind)
    std::shared_ptr<const BuildContext> context;  // absent after deserialize

    const GraphNode* find(NodeId id) const;
    const GraphNode* file_node(std::string_view path) const;
    // Nodes whose qualified_name equals `name`, ascending id.
    std::vector<const GraphNode*> by_qualified_name(std::string_view name) const;

    // Sorts and merges duplicate (src, dst, kind) edges, summing weights.
    void canonicalize_edges();
    // True when every edge endpoint exists in `nodes`.
    bool endpoints_closed() const;
};

// --- errors ------------------------------------------------------------------

QORPILOT_DEFINE_ERROR(EmptyRepository);
QORPILOT_DEFINE_ERROR(AlreadyCondensed);
QORPILOT_DEFINE_ERROR(NotCondensed);
QORPILOT_DEFINE_ERROR(UnknownFile);
QORPILOT_DEFINE_ERROR(MalformedGraphFile);

// --- operations ----------------------------------------------------------------

struct BuildOptions {
    // file -> include directories (repo-relative), from build metadata
    std::optional<std::map<std::string, std::vector<std::string>>> include_dirs;
};

struct BuildDiagnostics {
    uint32_t files_parsed = 0;
    uint32_t files_skipped = 0;   // undecodable or unsupported
    uint32_t parse_errors = 0;    // ERROR subtrees encountered
    uint32_t unresolved_calls = 0;
    uint32_t ambiguous_calls = 0;
    uint32_t unresolved_includes = 0;
    uint32_t unresolved_imports = 0;
};

CodeGraph build_graph(const std::filesystem::path& repo_root, const BuildOptions& options = {},
                      BuildDiagnostics* diagnostics = nullptr);

struct RegistrationPattern {
    std::string name_pattern;  // glob over callee names, e.g. "Tcl_CreateCommand"
    size_t string_arg_pos = 0;  // position of the literal command-name argument
};

std::vector<RegistrationPattern> default_registration_patterns();

struct LinkTally {
    uint32_t edges_added = 0;
    uint32_t registrations = 0;
    uint32_t skipped_nonliteral = 0;
    uint32_t unmatched = 0;  // registration without resolvable handler
};

// Adds script_invokes edges from script callsites to the C/C++ definitions
// bound by matching registration calls. Requires an in-process build context.
CodeGraph link_scripts(const CodeGraph& graph, const std::vector<RegistrationPattern>& patterns,
                       LinkTally* tally = nullptr);

CodeGraph condense_sccs(const CodeGraph& graph);

inline constexpr size_t kNoDegreeCap = static_cast<size_t>(-1);

CodeGraph sparsify(const CodeGraph& graph, size_t max_out_degree, double min_weight);

struct FilterDiagnostics {
    std::vector<std::pair<std::string, uint32_t>> removed_per_pattern;
};

CodeGraph filter_nodes(const CodeGraph& graph, const std::vector<std::string>& exclusion_globs,
                       FilterDiagnostics* diagnostics = nullptr);

struct IncrementalResult {
    CodeGraph graph;
    std::set<NodeId> dirty;
};

// Re-derives nodes of `changed_files` and recomputes cross-file edges; the
// untouched subgraph is reused as-is. Applies to build-stage (uncondensed)
// graphs; condense/sparsify re-run downstream.
IncrementalResult incremental_update(const CodeGraph& graph,
                                     const std::vector<std::string>& changed_files,
                                     const std::filesystem::path& repo_root,
                                     const BuildOptions& options = {});

// Canonical form: nodes sorted by id, edges by (src, dst, kind), LF, UTF-8.
std::string serialize(const CodeGraph& graph);
CodeGraph deserialize(std::string_view bytes);

}  // namespace qorpilot::graph
