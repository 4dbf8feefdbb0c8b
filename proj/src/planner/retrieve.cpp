#include <algorithm>
#include <cmath>

#include "qorpilot/planner/planner.hpp"

namespace qorpilot::planner {

namespace {

struct Candidate {
    EvidenceDoc doc;
    std::vector<float> embedding;
    bool embeddable = false;
};

double pair_similarity(const Candidate& a, const Candidate& b) {
    if (!a.embeddable || !b.embeddable) return 0.5;  // (1 + 0) / 2
    return (1.0 + retrieval::cosine(a.embedding, b.embedding)) / 2.0;
}

// min-max normalize raw search scores into relevance
void add_candidates(const retrieval::Index& index, const std::string& query, size_t k,
                    const std::set<std::string>& tag_filter, retrieval::Source* only_source,
                    std::map<retrieval::DocId, Candidate>& out) {
    std::vector<retrieval::ScoredHit> hits;
    try {
        hits = index.search(query, k, tag_filter);
    } catch (const retrieval::EmptyIndex&) {
        throw;  // caller guards; re-thrown for clarity
    }
    if (hits.empty()) return;
    double lo = hits.back().score, hi = hits.front().score;
    for (const auto& h : hits) {
        lo = std::min(lo, h.score);
        hi = std::max(hi, h.score);
    }
    for (const auto& h : hits) {
        const auto& doc = index.docs().at(h.doc_id);
        if (only_source && doc.source != *only_source) continue;
        double rel = hi > lo ? (h.score - lo) / (hi - lo) : (hi > 0 ? 1.0 : 0.0);
        auto it = out.find(h.doc_id);
        if (it != out.end()) {
            it->second.doc.relevance = std::max(it->second.doc.relevance, rel);
            continue;
        }
        Candidate c;
        c.doc.doc_id = h.doc_id;
        c.doc.source = doc.source;
        c.doc.subject = doc.subject;
        c.doc.text = doc.text;
        c.doc.relevance = rel;
        c.embedding = doc.embedding;
        c.embeddable = doc.embeddable;
        out.emplace(h.doc_id, std::move(c));
    }
}

}  // namespace

std::vector<EvidenceDoc> retrieve_context(const Objective& objective,
                                          const retrieval::Index& repo_index,
                                          const retrieval::Index& lit_index, size_t k,
                                          double lambda) {
    if (repo_index.size() == 0) throw retrieval::EmptyIndex("repo index is empty");
    if (lit_index.size() == 0) throw retrieval::EmptyIndex("literature index is empty");

    std::string query = std::string(metric_name(objective.metric));
    if (!objective.context.empty()) query += " " + objective.context;

    std::map<retrieval::DocId, Candidate> merged;
    // repo corpus: any-of-scope via one filtered search per scope tag
    for (const auto& tag : objective.scope)
        add_candidates(repo_index, query, k, {tag}, nullptr, merged);
    add_candidates(lit_index, query, k, {}, nullptr, merged);

    std::vector<Candidate> pool;
    for (auto& [id, c] : merged) pool.push_back(std::move(c));

    bool repo_has = false, lit_has = false;
    for (const auto& c : pool) {
        if (c.doc.source == retrieval::Source::Literature) lit_has = true;
        else repo_has = true;
    }

    // maximal marginal relevance
    std::vector<Candidate> picked;
    std::vector<bool> used(pool.size(), false);
    while (picked.size() < k) {
        double best = -1e300;
        size_t best_idx = pool.size();
        for (size_t i = 0; i < pool.size(); ++i) {
            if (used[i]) continue;
            double max_sim = 0.0;
            for (const auto& p : picked) max_sim = std::max(max_sim, pair_similarity(pool[i], p));
            double value = lambda * pool[i].doc.relevance - (1.0 - lambda) * max_sim;
            if (value > best ||
                (value == best && best_idx < pool.size() &&
                 pool[i].doc.doc_id < pool[best_idx].doc.doc_id)) {
                best = value;
                best_idx = i;
            }
        }
        if (best_idx >= pool.size()) break;
        used[best_idx] = true;
        picked.push_back(pool[best_idx]);
    }

    // representation guarantee when both corpora matched
    if (repo_has && lit_has && picked.size() >= 2) {
        auto has_source = [&](bool literature) {
            for (const auto& p : picked)
                if ((p.doc.source == retrieval::Source::Literature) == literature) return true;
            return false;
        };
        for (bool want_lit : {false, true}) {
            if (has_source(want_lit)) continue;
            const Candidate* best = nullptr;
            for (const auto& c : pool) {
                if ((c.doc.source == retrieval::Source::Literature) != want_lit) continue;
                if (!best || c.doc.relevance > best->doc.relevance ||
                    (c.doc.relevance == best->doc.relevance &&
                     c.doc.doc_id < best->doc.doc_id))
                    best = &c;
            }
            if (best) picked.back() = *best;
        }
    }

    std::vector<EvidenceDoc> out;
    out.reserve(picked.size());
    for (auto& p : picked) out.push_back(std::move(p.doc));
    return out;
}

}  // namespace qorpilot::planner
