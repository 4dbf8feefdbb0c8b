// Hybrid retrieval over cards, code snippets and literature: BM25 sparse
// scoring + hashing-embedder dense scoring + graph-hop structural boost,
// with domain-tag filtering and incremental updates that exactly match a
// fresh rebuild.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qorpilot/doc/docmaker.hpp"
#include "qorpilot/graph/codegraph.hpp"

namespace qorpilot::retrieval {

QORPILOT_DEFINE_ERROR(EmptyIndex);
QORPILOT_DEFINE_ERROR(UnknownDocId);
QORPILOT_DEFINE_ERROR(EmbedderUnavailable);
QORPILOT_DEFINE_ERROR(MalformedIndexFile);

using DocId = Hash128;

enum class Source { Card, Snippet, Literature };

std::string_view source_name(Source s);
std::optional<Source> source_from(std::string_view name);

// Lowercased alphanumeric runs; the one tokenizer for docs and queries.
std::vector<std::string> tokenize(std::string_view text);

struct IndexedDoc {
    DocId doc_id;
    Source source = Source::Literature;
    std::optional<graph::NodeId> subject;
    std::string text;
    std::set<std::string> domain_tags;
    // derived at ingestion:
    std::vector<std::string> tokens;
    std::vector<float> embedding;
    bool embeddable = false;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual size_t dim() const = 0;
    // nullopt marks the text unembeddable (excluded from dense scoring)
    virtual std::optional<std::vector<float>> embed(const std::string& text) = 0;
};

// token -> fnv1a64(token) % dim bucket, count, L2-normalize
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(size_t dim = 256) : dim_(dim) {}
    size_t dim() const override { return dim_; }
    std::optional<std::vector<float>> embed(const std::string& text) override;

private:
    size_t dim_;
};

// External command per the plugin contract: {"text": ...} on stdin,
// {"embedding": [...]} (or {"embedding": null}) on stdout. Nonzero exit ->
// EmbedderUnavailable.
class ProcessEmbedder : public Embedder {
public:
    ProcessEmbedder(std::string command, size_t dim)
        : command_(std::move(command)), dim_(dim) {}
    size_t dim() const override { return dim_; }
    const std::string& command() const { return command_; }
    std::optional<std::vector<float>> embed(const std::string& text) override;

private:
    std::string command_;
    size_t dim_;
};

struct CorpusStats {
    size_t doc_count = 0;
    double total_len = 0;
    std::map<std::string, size_t> doc_freq;
    double avg_len() const { return doc_count == 0 ? 0.0 : total_len / doc_count; }
};

double bm25_score(const std::vector<std::string>& query_tokens, const IndexedDoc& doc,
                  const CorpusStats& stats, double k1, double b);

double cosine(const std::vector<float>& a, const std::vector<float>& b);

struct ScoredHit {
    DocId doc_id;
    double score = 0;
    double sparse = 0;      // min-max normalized BM25, in [0,1]
    double dense = 0;       // (1+cos)/2, in [0,1]
    double structural = 0;  // max(0, 1 - hops/H)
};

struct IndexConfig {
    double alpha = 0.5;  // sparse
    double beta = 0.3;   // dense
    double gamma = 0.2;  // structural
    double k1 = 1.2;
    double b = 0.75;
    size_t embed_dim = 256;
    double hop_cap = 4;
};

class Index {
public:
    explicit Index(IndexConfig config = {}, std::shared_ptr<Embedder> embedder = nullptr);

    const IndexConfig& config() const { return config_; }
    size_t size() const { return docs_.size(); }
    const std::map<DocId, IndexedDoc>& docs() const { return docs_; }
    const CorpusStats& stats() const { return stats_; }

    // hop provider for the structural part (the condensed graph)
    void attach_graph(std::shared_ptr<const graph::CodeGraph> condensed);

    // derives tokens/embedding, replaces any existing doc with the same id
    void upsert(IndexedDoc doc);
    // throws UnknownDocId when a delete names an absent doc
    void update(std::vector<IndexedDoc> upserts, const std::vector<DocId>& deletes);

    std::vector<ScoredHit> search(const std::string& query, size_t k,
                                  const std::set<std::string>& tag_filter = {},
                                  std::optional<graph::NodeId> focus = std::nullopt) const;

    void save(const std::filesystem::path& dir) const;
    static Index load(const std::filesystem::path& dir);

private:
    void recompute_stats();

    IndexConfig config_;
    std::shared_ptr<Embedder> embedder_;
    std::map<DocId, IndexedDoc> docs_;
    CorpusStats stats_;
    std::shared_ptr<const graph::CodeGraph> graph_;
};

// --- corpus ingestion ----------------------------------------------------------

// Tags: lowercase path directory components + file stem + language name.
std::set<std::string> tags_for_node(const graph::CodeGraph& graph, graph::NodeId id);

// One text document per card (includes the subject's qualified name and a
// canonical "knob:" line per config knob for downstream extractive planning).
IndexedDoc doc_from_card(const doc::DocCard& card, const graph::CodeGraph& graph);

// Source snippet at condensed-node granularity (truncated).
IndexedDoc doc_from_snippet(const graph::CodeGraph& graph, graph::NodeId id,
                            const std::filesystem::path& repo_root,
                            size_t max_bytes = 4096);

// Plain-text files with optional sidecar "<name>.tags" (comma-separated).
std::vector<IndexedDoc> literature_from_dir(const std::filesystem::path& dir);

}  // namespace qorpilot::retrieval
