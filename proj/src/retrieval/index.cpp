#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/support/subprocess.hpp"
#include "qorpilot/retrieval/index.hpp"

namespace qorpilot::retrieval {

std::string_view source_name(Source s) {
    switch (s) {
        case Source::Card: return "Card";
        case Source::Snippet: return "Snippet";
        case Source::Literature: return "Literature";
    }
    return "Literature";
}

std::optional<Source> source_from(std::string_view name) {
    if (name == "Card") return Source::Card;
    if (name == "Snippet") return Source::Snippet;
    if (name == "Literature") return Source::Literature;
    return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::optional<std::vector<float>> HashingEmbedder::embed(const std::string& text) {
    auto tokens = tokenize(text);
    if (tokens.empty()) return std::nullopt;
    std::vector<float> v(dim_, 0.0f);
    for (const auto& tok : tokens) v[fnv1a64(tok) % dim_] += 1.0f;
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0) return std::nullopt;
    for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

std::optional<std::vector<float>> ProcessEmbedder::embed(const std::string& text) {
    Json request;
    request["text"] = text;
    SubprocessResult result;
    try {
        result = run_subprocess(command_, canonical_dump(request));
    } catch (const SubprocessError& e) {
        throw EmbedderUnavailable(std::string("embedder spawn failed: ") + e.what());
    }
    if (result.exit_code != 0)
        throw EmbedderUnavailable("embedder '" + command_ + "' exited " +
                                  std::to_string(result.exit_code) + ": " + result.err);
    Json response;
    try {
        response = Json::parse(result.out);
    } catch (const nlohmann::json::parse_error& e) {
        throw EmbedderUnavailable(std::string("embedder wrote invalid JSON: ") + e.what());
    }
    if (!response.contains("embedding") || response["embedding"].is_null())
        return std::nullopt;
    std::vector<float> v;
    for (const auto& x : response["embedding"]) v.push_back(x.get<float>());
    if (v.size() != dim_)
        throw EmbedderUnavailable("embedder returned dimension " + std::to_string(v.size()) +
                                  ", index expects " + std::to_string(dim_));
    return v;
}

double bm25_score(const std::vector<std::string>& query_tokens, const IndexedDoc& doc,
                  const CorpusStats& stats, double k1, double b) {
    if (doc.tokens.empty() || stats.doc_count == 0) return 0.0;
    std::unordered_map<std::string_view, size_t> tf;
    for (const auto& tok : doc.tokens) ++tf[tok];
    double dl = static_cast<double>(doc.tokens.size());
    double avg = stats.avg_len();
    double score = 0.0;
    std::unordered_set<std::string_view> seen;
    for (const auto& q : query_tokens) {
        if (!seen.insert(q).second) continue;  // each query term once
        auto it = tf.find(q);
        if (it == tf.end()) continue;
        auto df_it = stats.doc_freq.find(std::string(q));
        double df = df_it == stats.doc_freq.end() ? 0.0 : static_cast<double>(df_it->second);
        double n = static_cast<double>(stats.doc_count);
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        double f = static_cast<double>(it->second);
        double denom = f + k1 * (1.0 - b + b * (avg == 0 ? 1.0 : dl / avg));
        score += idf * (f * (k1 + 1.0)) / denom;
    }
    return score;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.empty() || b.empty() || a.size() != b.size()) return 0.0;
    double dot = 0;
    for (size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    return dot;
}

Index::Index(IndexConfig config, std::shared_ptr<Embedder> embedder)
    : config_(config), embedder_(std::move(embedder)) {
    if (!embedder_) embedder_ = std::make_shared<HashingEmbedder>(config_.embed_dim);
}

void Index::attach_graph(std::shared_ptr<const graph::CodeGraph> condensed) {
    graph_ = std::move(condensed);
}

void Index::upsert(IndexedDoc doc) {
    doc.tokens = tokenize(doc.text);
    auto embedding = embedder_->embed(doc.text);
    doc.embeddable = embedding.has_value();
    doc.embedding = embedding ? std::move(*embedding) : std::vector<float>(embedder_->dim(), 0.f);
    docs_.insert_or_assign(doc.doc_id, std::move(doc));
    recompute_stats();
}

void Index::update(std::vector<IndexedDoc> upserts, const std::vector<DocId>& deletes) {
    for (const auto& id : deletes)
        if (!docs_.count(id)) throw UnknownDocId("delete of unknown doc " + id.to_hex());
    for (const auto& id : deletes) docs_.erase(id);
    for (auto& doc : upserts) {
        doc.tokens = tokenize(doc.text);
        auto embedding = embedder_->embed(doc.text);
        doc.embeddable = embedding.has_value();
        doc.embedding =
            embedding ? std::move(*embedding) : std::vector<float>(embedder_->dim(), 0.f);
        docs_.insert_or_assign(doc.doc_id, std::move(doc));
    }
    recompute_stats();
}

void Index::recompute_stats() {
    stats_ = {};
    stats_.doc_count = docs_.size();
    for (const auto& [id, doc] : docs_) {
        stats_.total_len += static_cast<double>(doc.tokens.size());
        std::set<std::string> uniq(doc.tokens.begin(), doc.tokens.end());
        for (const auto& tok : uniq) ++stats_.doc_freq[tok];
    }
}

namespace {

// Undirected BFS hop count between two nodes on the condensed graph, capped.
std::optional<int> hops_between(const graph::CodeGraph& g, graph::NodeId from,
                                graph::NodeId to, int cap) {
    if (from == to) return 0;
    std::unordered_map<graph::NodeId, std::vector<graph::NodeId>> adj;
    for (const auto& e : g.edges) {
        adj[e.src].push_back(e.dst);
        adj[e.dst].push_back(e.src);
    }
    std::unordered_set<graph::NodeId> seen{from};
    std::deque<std::pair<graph::NodeId, int>> queue{{from, 0}};
    while (!queue.empty()) {
        auto [id, d] = queue.front();
        queue.pop_front();
        if (d >= cap) continue;
        auto it = adj.find(id);
        if (it == adj.end()) continue;
        for (auto next : it->second) {
            if (!seen.insert(next).second) continue;
            if (next == to) return d + 1;
            queue.emplace_back(next, d + 1);
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<ScoredHit> Index::search(const std::string& query, size_t k,
                                     const std::set<std::string>& tag_filter,
                                     std::optional<graph::NodeId> focus) const {
    if (docs_.empty()) throw EmptyIndex("search on an empty index");

    auto query_tokens = tokenize(query);
    auto query_embedding = embedder_->embed(query);

    // tag filter drops non-matching docs before scoring (subset semantics)
    std::vector<const IndexedDoc*> candidates;
    for (const auto& [id, doc] : docs_) {
        bool keep = true;
        for (const auto& tag : tag_filter)
            if (!doc.domain_tags.count(tag)) keep = false;
        if (keep) candidates.push_back(&doc);
    }
    if (candidates.empty()) return {};

    std::vector<double> raw_sparse(candidates.size(), 0.0);
    for (size_t i = 0; i < candidates.size(); ++i)
        raw_sparse[i] = bm25_score(query_tokens, *candidates[i], stats_, config_.k1, config_.b);
    double lo = *std::min_element(raw_sparse.begin(), raw_sparse.end());
    double hi = *std::max_element(raw_sparse.begin(), raw_sparse.end());

    std::vector<ScoredHit> hits;
    hits.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        const IndexedDoc& doc = *candidates[i];
        ScoredHit hit;
        hit.doc_id = doc.doc_id;
        hit.sparse = hi > lo ? (raw_sparse[i] - lo) / (hi - lo) : (hi > 0 ? 1.0 : 0.0);
        if (query_embedding && doc.embeddable)
            hit.dense = (1.0 + cosine(*query_embedding, doc.embedding)) / 2.0;
        if (focus && doc.subject && graph_) {
            auto hops = hops_between(*graph_, *doc.subject, *focus,
                                     static_cast<int>(config_.hop_cap));
            if (hops)
                hit.structural =
                    std::max(0.0, 1.0 - static_cast<double>(*hops) / config_.hop_cap);
        }
        hit.score = config_.alpha * hit.sparse + config_.beta * hit.dense +
                    config_.gamma * hit.structural;
        hits.push_back(hit);
    }
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace qorpilot::retrieval
