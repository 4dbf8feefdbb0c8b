// Tcl structural scanner. Splits scripts into commands by word, recognizing
// proc definitions, namespace eval blocks, set assignments, source/package
// imports, and plain command invocations (callsites). Braced bodies of the
// usual control commands are parsed as nested scripts.
#include <cctype>
#include <unordered_set>

#include "parsers.hpp"

namespace qorpilot::syntax::detail {

namespace {

struct Word {
    std::string raw;      // bytes as written, including braces/quotes
    uint32_t start = 0;
    uint32_t end = 0;
    char delim = 0;       // '{', '"', '[' or 0 for bare words
};

// Strips one level of {} or "" quoting.
std::string unquote(const Word& w) {
    if ((w.delim == '{' || w.delim == '"') && w.raw.size() >= 2)
        return w.raw.substr(1, w.raw.size() - 2);
    return w.raw;
}

const std::unordered_set<std::string> kScriptArgCommands = {
    "if", "elseif", "else", "while", "for", "foreach", "switch",
    "catch", "eval", "uplevel", "after", "try", "finally"};

struct TclParser {
    std::string_view src;

    bool read_word(size_t& i, Word& out, bool& hit_terminator) {
        const size_t n = src.size();
        hit_terminator = false;
        // skip spaces and line continuations
        while (i < n) {
            char c = src[i];
            if (c == ' ' || c == '\t') {
                ++i;
            } else if (c == '\\' && i + 1 < n && src[i + 1] == '\n') {
                i += 2;
            } else {
                break;
            }
        }
        if (i >= n) {
            hit_terminator = true;
            return false;
        }
        char c = src[i];
        if (c == '\n' || c == ';') {
            ++i;
            hit_terminator = true;
            return false;
        }
        out.start = static_cast<uint32_t>(i);
        out.delim = 0;
        if (c == '{') {
            out.delim = '{';
            int depth = 0;
            size_t j = i;
            while (j < n) {
                if (src[j] == '\\' && j + 1 < n) {
                    j += 2;
                    continue;
                }
                if (src[j] == '{') ++depth;
                else if (src[j] == '}' && --depth == 0) {
                    ++j;
                    break;
                }
                ++j;
            }
            out.raw = std::string(src.substr(i, j - i));
            out.end = static_cast<uint32_t>(j);
            i = j;
            return true;
        }
        if (c == '"') {
            out.delim = '"';
            size_t j = i + 1;
            while (j < n && src[j] != '"') {
                if (src[j] == '\\' && j + 1 < n) ++j;
                ++j;
            }
            if (j < n) ++j;
            out.raw = std::string(src.substr(i, j - i));
            out.end = static_cast<uint32_t>(j);
            i = j;
            return true;
        }
        if (c == '[') {
            out.delim = '[';
            int depth = 0;
            size_t j = i;
            while (j < n) {
                if (src[j] == '\\' && j + 1 < n) {
                    j += 2;
                    continue;
                }
                if (src[j] == '[') ++depth;
                else if (src[j] == ']' && --depth == 0) {
                    ++j;
                    break;
                }
                ++j;
            }
            out.raw = std::string(src.substr(i, j - i));
            out.end = static_cast<uint32_t>(j);
            i = j;
            return true;
        }
        // bare word: runs to whitespace/terminator; embedded [..] kept whole
        size_t j = i;
        while (j < n) {
            char d = src[j];
            if (d == ' ' || d == '\t' || d == '\n' || d == ';') break;
            if (d == '\\' && j + 1 < n) {
                j += 2;
                continue;
            }
            if (d == '[') {
                int depth = 0;
                while (j < n) {
                    if (src[j] == '[') ++depth;
                    else if (src[j] == ']' && --depth == 0) {
                        ++j;
                        break;
                    }
                    ++j;
                }
                continue;
            }
            ++j;
        }
        out.raw = std::string(src.substr(i, j - i));
        out.end = static_cast<uint32_t>(j);
        i = j;
        return true;
    }

    void parse_script(size_t begin, size_t end_pos, const std::string& prefix,
                      std::vector<SyntaxNode>& out) {
        size_t i = begin;
        while (i < end_pos) {
            // skip blank space / terminators
            while (i < end_pos &&
                   (src[i] == ' ' || src[i] == '\t' || src[i] == '\n' || src[i] == ';'))
                ++i;
            if (i >= end_pos) break;
            if (src[i] == '#') {  // comment at command position
                while (i < end_pos && src[i] != '\n') ++i;
                continue;
            }
            std::vector<Word> words;
            bool term = false;
            size_t word_scan = i;
            while (word_scan < end_pos && !term) {
                Word w;
                size_t before = word_scan;
                if (!read_word(word_scan, w, term)) {
                    if (word_scan == before && !term) ++word_scan;  // safety
                    continue;
                }
                if (w.end > end_pos) {  // word ran past our region (unbalanced)
                    w.end = static_cast<uint32_t>(end_pos);
                    w.raw = w.raw.substr(0, end_pos - w.start);
                }
                words.push_back(std::move(w));
            }
            i = word_scan;
            if (words.empty()) continue;
            emit_command(words, prefix, out);
        }
    }

    void emit_command(const std::vector<Word>& words, const std::string& prefix,
                      std::vector<SyntaxNode>& out) {
        const std::string head = words[0].raw;
        uint32_t span_start = words[0].start;
        uint32_t span_end = words.back().end;

        // unbalanced brace/bracket words mark the command region as an error
        for (const auto& w : words) {
            if ((w.delim == '{' && (w.raw.size() < 2 || w.raw.back() != '}')) ||
                (w.delim == '[' && (w.raw.size() < 2 || w.raw.back() != ']'))) {
                SyntaxNode err;
                err.kind = "ERROR";
                err.span = {w.start, w.end};
                out.push_back(std::move(err));
            }
        }

        // command substitutions nested in any word get their own nodes
        for (const auto& w : words) {
            if (w.delim == '[' && w.raw.size() >= 2)
                parse_script_string(w.raw.substr(1, w.raw.size() - 2), w.start + 1, prefix, out);
        }

        if (head == "proc" && words.size() >= 4) {
            SyntaxNode node;
            node.kind = "procedure";
            std::string name = unquote(words[1]);
            node.name = name.rfind("::", 0) == 0 ? name.substr(2)
                        : prefix.empty()         ? name
                                                 : prefix + name;
            node.detail = unquote(words[2]);
            node.span = {span_start, span_end};
            if (words[3].delim == '{')
                parse_script_string(unquote(words[3]), words[3].start + 1, prefix,
                                    node.children);
            out.push_back(std::move(node));
            return;
        }
        if (head == "namespace" && words.size() >= 4 && unquote(words[1]) == "eval") {
            std::string ns = unquote(words[2]);
            std::string inner = ns.empty() ? prefix : prefix + ns + "::";
            if (words[3].delim == '{')
                parse_script_string(unquote(words[3]), words[3].start + 1, inner, out);
            return;
        }
        if (head == "set" && words.size() >= 2) {
            SyntaxNode node;
            node.kind = "variable_assignment";
            node.name = unquote(words[1]);
            if (words.size() >= 3) node.detail = unquote(words[2]);
            node.span = {span_start, span_end};
            out.push_back(std::move(node));
            return;
        }
        if (head == "source" && words.size() >= 2) {
            SyntaxNode node;
            node.kind = "import_statement";
            node.detail = unquote(words.back());
            node.name = node.detail;
            node.span = {span_start, span_end};
            out.push_back(std::move(node));
            return;
        }
        if (head == "package" && words.size() >= 3 && unquote(words[1]) == "require") {
            SyntaxNode node;
            node.kind = "import_statement";
            node.detail = unquote(words[2]);
            node.name = node.detail;
            node.span = {span_start, span_end};
            out.push_back(std::move(node));
            return;
        }

        // general command: a callsite unless the head is computed
        if (head.empty() || head[0] == '$' || head[0] == '[') {
            recurse_control_args(words, prefix, out);
            return;
        }
        SyntaxNode node;
        node.kind = "command";
        std::string name = head;
        if (name.rfind("::", 0) == 0) name = name.substr(2);
        node.name = name;
        node.span = {span_start, span_end};
        for (size_t w = 1; w < words.size() && node.args.size() < 8; ++w) {
            std::string a = words[w].raw;
            if (a.size() > 200) a.resize(200);
            node.args.push_back(std::move(a));
        }
        out.push_back(std::move(node));
        // control commands carry scripts in braced args
        if (kScriptArgCommands.count(head)) {
            recurse_control_args(words, prefix, out.back().children);
        }
    }

    void recurse_control_args(const std::vector<Word>& words, const std::string& prefix,
                              std::vector<SyntaxNode>& out) {
        for (size_t w = 1; w < words.size(); ++w) {
            if (words[w].delim != '{') continue;
            std::string body = unquote(words[w]);
            // only braces that plausibly hold a script
            if (body.find('\n') == std::string::npos && body.find(';') == std::string::npos &&
                body.find(' ') == std::string::npos)
                continue;
            parse_script_string(body, words[w].start + 1, prefix, out);
        }
    }

    // Parses `body` (a substring copy starting at absolute offset `offset`).
    void parse_script_string(const std::string& body, uint32_t offset,
                             const std::string& prefix, std::vector<SyntaxNode>& out) {
        TclParser sub{body};
        std::vector<SyntaxNode> nodes;
        sub.parse_script(0, body.size(), prefix, nodes);
        shift_spans(nodes, offset);
        for (auto& n : nodes) out.push_back(std::move(n));
    }

    static void shift_spans(std::vector<SyntaxNode>& nodes, uint32_t offset) {
        for (auto& n : nodes) {
            n.span.start += offset;
            n.span.end += offset;
            shift_spans(n.children, offset);
        }
    }
};

}  // namespace

SyntaxNode parse_tcl(std::string_view src) {
    TclParser parser{src};
    SyntaxNode root;
    parser.parse_script(0, src.size(), "", root.children);
    return root;
}

}  // namespace qorpilot::syntax::detail
