// Internal: per-file derivation and cross-file edge resolution shared by
// build_graph and incremental_update.
#pragma once

#include "qorpilot/graph/codegraph.hpp"

namespace qorpilot::graph::detail {

struct FileDerivation {
    std::vector<GraphNode> nodes;  // File node first
    FileFacts facts;
    uint32_t parse_errors = 0;
};

// Parses one file's bytes into graph nodes plus reference facts.
FileDerivation derive_file(const std::string& rel_path, const std::string& bytes);

// Recomputes every cross-file edge (calls/includes/imports/binds) plus
// contains edges from facts + node table. Deterministic in its inputs.
std::vector<GraphEdge> resolve_edges(const std::map<NodeId, GraphNode>& nodes,
                                     const std::map<std::string, FileFacts>& files,
                                     const BuildOptions& options,
                                     BuildDiagnostics* diagnostics);

std::string fingerprint_files(const std::map<std::string, FileFacts>& files);

}  // namespace qorpilot::graph::detail
