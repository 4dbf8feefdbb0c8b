#include <algorithm>
#include <cctype>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/doc/docmaker.hpp"
#include "sig_util.hpp"

namespace fs = std::filesystem;

namespace qorpilot::doc {

namespace {

using graph::GraphNode;
using graph::NodeKind;
using graph::Span;

std::string slice(const std::string& text, Span span) {
    if (span.start >= text.size()) return {};
    return text.substr(span.start, std::min<size_t>(span.end, text.size()) - span.start);
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// inner text of the parenthesized call starting right after `pos`
std::optional<std::string> paren_inner(const std::string& text, size_t pos) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || text[pos] != '(') return std::nullopt;
    int depth = 0;
    size_t start = pos + 1;
    for (size_t i = pos; i < text.size(); ++i) {
        if (text[i] == '(') ++depth;
        else if (text[i] == ')' && --depth == 0) {
            std::string inner = text.substr(start, i - start);
            // trim
            size_t a = inner.find_first_not_of(" \t\n");
            size_t b = inner.find_last_not_of(" \t\n");
            if (a == std::string::npos) return std::string();
            return inner.substr(a, b - a + 1);
        }
    }
    return std::nullopt;
}

void scan_assertions(const std::string& body, std::vector<std::string>& out) {
    size_t pos = 0;
    while ((pos = body.find("assert", pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !word_char(body[pos - 1]);
        size_t end = pos + 6;
        // allow assert / Assert / *_assert variants ending exactly at "assert"
        if (left_ok && (end >= body.size() || !word_char(body[end]))) {
            if (auto inner = paren_inner(body, end); inner && !inner->empty())
                out.push_back(*inner);
        }
        pos = end;
    }
}

void scan_error_messages(const std::string& body, std::vector<std::string>& out) {
    static const char* kMarkers[] = {"error", "fatal", "warn", "throw", "abort", "panic"};
    size_t pos = 0;
    while (pos < body.size()) {
        size_t best = std::string::npos;
        for (const char* marker : kMarkers) {
            size_t hit = body.find(marker, pos);
            if (hit != std::string::npos && (best == std::string::npos || hit < best)) {
                // word-bounded on the left; right side may continue (error_out)
                if (hit == 0 || !word_char(body[hit - 1])) best = hit;
            }
        }
        if (best == std::string::npos) break;
        size_t quote = body.find('"', best);
        if (quote != std::string::npos && quote - best < 120) {
            size_t close = quote + 1;
            while (close < body.size() && body[close] != '"') {
                if (body[close] == '\\' && close + 1 < body.size()) ++close;
                ++close;
            }
            if (close < body.size()) {
                std::string msg = body.substr(quote + 1, close - quote - 1);
                if (!msg.empty() && std::find(out.begin(), out.end(), msg) == out.end())
                    out.push_back(msg);
                pos = close + 1;
                continue;
            }
        }
        pos = best + 1;
    }
}

void scan_config_flags(const std::string& body, uint32_t base, std::vector<ConfigFlag>& out) {
    for (size_t i = 0; i + 1 < body.size(); ++i) {
        if (body[i] != '-') continue;
        if (!std::isalpha(static_cast<unsigned char>(body[i + 1]))) continue;
        char before = i == 0 ? ' ' : body[i - 1];
        if (word_char(before) || before == '-') continue;  // minus or --long
        bool quoted = before == '"';
        if (!quoted && before != ' ' && before != '\t' && before != '\n' && before != '{' &&
            before != '(')
            continue;
        size_t j = i + 1;
        while (j < body.size() && (word_char(body[j]) || body[j] == '-')) ++j;
        std::string name = body.substr(i, j - i);
        if (quoted && j < body.size() && body[j] != '"') continue;  // partial literal
        // default: the next bare token when it is a number or quoted literal
        std::string def;
        size_t k = quoted ? j + 1 : j;
        while (k < body.size() && (body[k] == ' ' || body[k] == '\t')) ++k;
        if (k < body.size()) {
            if (std::isdigit(static_cast<unsigned char>(body[k])) ||
                (body[k] == '.' && k + 1 < body.size() &&
                 std::isdigit(static_cast<unsigned char>(body[k + 1])))) {
                size_t e = k;
                while (e < body.size() && (word_char(body[e]) || body[e] == '.')) ++e;
                def = body.substr(k, e - k);
            } else if (body[k] == '"') {
                size_t e = body.find('"', k + 1);
                if (e != std::string::npos && e - k < 60) def = body.substr(k + 1, e - k - 1);
            }
        }
        bool duplicate = false;
        for (const auto& f : out)
            if (f.name == name) duplicate = true;
        if (!duplicate)
            out.push_back({name, def,
                           {base + static_cast<uint32_t>(i), base + static_cast<uint32_t>(j)}});
        i = j;
    }
}

// "int k = 8, double w" -> {(k, 8)}; tcl "proc p {a {b 8}}" -> {(b, 8)}
void parse_default_params(const std::string& signature, graph::Language lang,
                          std::vector<std::pair<std::string, std::string>>& out) {
    if (lang == graph::Language::Tcl) {
        for (const auto& param : detail::split_signature_params(signature)) {
            if (param.size() < 2 || param.front() != '{' || param.back() != '}') continue;
            std::string inner = param.substr(1, param.size() - 2);
            size_t a = inner.find_first_not_of(" \t");
            size_t b = inner.find_last_not_of(" \t");
            if (a == std::string::npos) continue;
            inner = inner.substr(a, b - a + 1);
            size_t sp = inner.find(' ');
            if (sp != std::string::npos)
                out.emplace_back(inner.substr(0, sp), inner.substr(sp + 1));
        }
        return;
    }
    size_t open = signature.find('(');
    size_t close = signature.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close <= open) return;
    std::string params = signature.substr(open + 1, close - open - 1);
    size_t start = 0;
    int depth = 0;
    for (size_t i = 0; i <= params.size(); ++i) {
        if (i < params.size()) {
            char c = params[i];
            if (c == '(' || c == '<' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == '>' || c == ']' || c == '}') --depth;
            if (c != ',' || depth != 0) continue;
        }
        std::string param = params.substr(start, i - start);
        start = i + 1;
        size_t eq = param.find('=');
        if (eq == std::string::npos) continue;
        std::string lhs = param.substr(0, eq);
        std::string rhs = param.substr(eq + 1);
        auto trim = [](std::string& s) {
            size_t a = s.find_first_not_of(" \t");
            size_t b = s.find_last_not_of(" \t");
            s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        trim(lhs);
        trim(rhs);
        size_t name_start = lhs.find_last_of(" \t*&");
        std::string name = name_start == std::string::npos ? lhs : lhs.substr(name_start + 1);
        if (!name.empty() && !rhs.empty()) out.emplace_back(name, rhs);
    }
}

}  // namespace

CardSubject card_subject(const CodeGraph& graph, NodeId id) {
    const GraphNode* node = graph.find(id);
    if (!node) throw UnknownNode("no node " + id.to_hex());
    CardSubject s;
    s.id = id;
    s.kind = node->kind;
    s.qualified_name = node->qualified_name;
    s.path = node->path;
    s.member_count = node->members.size();
    return s;
}

EvidenceBundle extract_evidence(const CodeGraph& graph, NodeId id, const CardStore& cards,
                                const fs::path& repo_root) {
    const GraphNode* node = graph.find(id);
    if (!node) throw UnknownNode("no node " + id.to_hex());

    EvidenceBundle bundle;
    bundle.subject = id;

    // spans to scan: the node itself, plus retired member spans for groups
    std::vector<const GraphNode*> parts{node};
    if (node->kind == NodeKind::SccGroup && graph.context) {
        for (NodeId member : node->members) {
            auto it = graph.context->retired.find(member);
            if (it != graph.context->retired.end()) parts.push_back(&it->second);
        }
    }
    std::sort(parts.begin(), parts.end(), [](const GraphNode* a, const GraphNode* b) {
        return std::tie(a->path, a->span.start, a->qualified_name) <
               std::tie(b->path, b->span.start, b->qualified_name);
    });
    parts.erase(std::unique(parts.begin(), parts.end(),
                            [](const GraphNode* a, const GraphNode* b) {
                                return a->path == b->path && a->span == b->span &&
                                       a->qualified_name == b->qualified_name;
                            }),
                parts.end());

    std::map<std::string, std::string> file_cache;
    for (const GraphNode* part : parts) {
        if (part->signature && !part->signature->empty()) {
            if (std::find(bundle.signatures.begin(), bundle.signatures.end(),
                          *part->signature) == bundle.signatures.end())
                bundle.signatures.push_back(*part->signature);
            parse_default_params(*part->signature, part->language, bundle.default_params);
        }
        auto cached = file_cache.find(part->path);
        if (cached == file_cache.end()) {
            std::string content;
            try {
                content = read_file(repo_root / part->path);
            } catch (const IoError&) {
                content.clear();
            }
            cached = file_cache.emplace(part->path, std::move(content)).first;
        }
        std::string body = slice(cached->second, part->span);
        scan_assertions(body, bundle.assertions);
        scan_config_flags(body, part->span.start, bundle.config_flags);
        scan_error_messages(body, bundle.error_messages);
    }

    // neighbors: calls successors, ascending id, role line from their cards
    std::set<NodeId> succ;
    for (const auto& e : graph.edges)
        if (e.kind == graph::EdgeKind::Calls && e.src == id) succ.insert(e.dst);
    for (NodeId callee : succ) {
        const DocCard* card = cards.find(callee);
        if (!card)
            throw MissingDependencyCard("callee " + callee.to_hex() +
                                        " has no card yet (schedule violation)");
        bundle.neighbors.emplace_back(callee, card->role);
    }
    return bundle;
}

Hash128 evidence_checksum(const EvidenceBundle& bundle) {
    Json j;
    j["subject"] = bundle.subject.to_hex();
    j["signatures"] = bundle.signatures;
    Json params = Json::array();
    for (const auto& [name, value] : bundle.default_params)
        params.push_back(Json::array({name, value}));
    j["default_params"] = std::move(params);
    j["assertions"] = bundle.assertions;
    Json flags = Json::array();
    for (const auto& f : bundle.config_flags)
        flags.push_back(Json::array({f.name, f.default_value, f.span.start, f.span.end}));
    j["config_flags"] = std::move(flags);
    j["error_messages"] = bundle.error_messages;
    Json neighbors = Json::array();
    for (const auto& [id, role] : bundle.neighbors)
        neighbors.push_back(Json::array({id.to_hex(), role}));
    j["neighbors"] = std::move(neighbors);
    return md5(j.dump());
}

}  // namespace qorpilot::doc
