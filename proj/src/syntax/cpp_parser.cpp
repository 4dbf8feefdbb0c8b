// C/C++ structural scanner. Tokenizes, then walks declaration units tracking
// namespace/class scope to emit definitions, declarations, callsites and
// include directives with byte spans. It is a concrete-syntax scanner, not a
// compiler front end: preprocessor-conditional imbalance or truncated input
// degrades to ERROR-kind subtrees.
#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "parsers.hpp"

namespace qorpilot::syntax::detail {

namespace {

struct Token {
    enum Type { Ident, Number, String, CharLit, Punct, Preproc } type;
    std::string_view text;
    uint32_t start = 0;
    uint32_t end = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> toks;
    size_t i = 0;
    const size_t n = src.size();
    bool line_start = true;

    auto push = [&](Token::Type t, size_t start, size_t end) {
        toks.push_back({t, src.substr(start, end - start), static_cast<uint32_t>(start),
                        static_cast<uint32_t>(end)});
    };

    while (i < n) {
        char c = src[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            size_t close = src.find("*/", i + 2);
            i = close == std::string_view::npos ? n : close + 2;
            continue;
        }
        if (c == '#' && line_start) {
            size_t start = i;
            while (i < n) {
                if (src[i] == '\n' && (i == 0 || src[i - 1] != '\\')) break;
                ++i;
            }
            push(Token::Preproc, start, i);
            line_start = true;
            continue;
        }
        line_start = false;
        if (c == '"' || c == '\'') {
            // raw string?
            if (c == '"' && i >= 1 && src[i - 1] == 'R') {
                size_t paren = src.find('(', i + 1);
                if (paren != std::string_view::npos) {
                    std::string delim = ")" + std::string(src.substr(i + 1, paren - i - 1)) + "\"";
                    size_t close = src.find(delim, paren + 1);
                    size_t end = close == std::string_view::npos ? n : close + delim.size();
                    push(Token::String, i, end);
                    i = end;
                    continue;
                }
            }
            size_t start = i++;
            while (i < n && src[i] != c) {
                if (src[i] == '\\' && i + 1 < n) ++i;
                if (src[i] == '\n') break;  // unterminated literal: stop at EOL
                ++i;
            }
            if (i < n && src[i] == c) ++i;
            push(c == '"' ? Token::String : Token::CharLit, start, i);
            continue;
        }
        if (ident_start(c)) {
            size_t start = i;
            while (i < n && ident_char(src[i])) ++i;
            push(Token::Ident, start, i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = i;
            while (i < n && (ident_char(src[i]) || src[i] == '.' ||
                             ((src[i] == '+' || src[i] == '-') && i > start &&
                              (src[i - 1] == 'e' || src[i - 1] == 'E'))))
                ++i;
            push(Token::Number, start, i);
            continue;
        }
        // multi-char puncts we care about
        if (c == ':' && i + 1 < n && src[i + 1] == ':') {
            push(Token::Punct, i, i + 2);
            i += 2;
            continue;
        }
        if (c == '-' && i + 1 < n && src[i + 1] == '>') {
            push(Token::Punct, i, i + 2);
            i += 2;
            continue;
        }
        push(Token::Punct, i, i + 1);
        ++i;
    }
    return toks;
}

const std::unordered_set<std::string_view> kNotCallee = {
    "if", "for", "while", "switch", "return", "sizeof", "catch", "new", "delete",
    "throw", "alignof", "decltype", "static_assert", "defined", "case", "do", "else",
    "int", "char", "bool", "float", "double", "void", "long", "short", "unsigned",
    "signed", "auto", "const", "constexpr", "static", "noexcept", "co_return",
    "co_await", "co_yield"};

const std::unordered_set<std::string_view> kTypeIntro = {"class", "struct", "enum",
                                                         "union", "namespace"};

struct Parser {
    std::string_view src;
    std::vector<Token> toks;

    explicit Parser(std::string_view s) : src(s), toks(tokenize(s)) {}

    const Token& tok(size_t i) const { return toks[i]; }
    bool is_punct(size_t i, std::string_view p) const {
        return i < toks.size() && toks[i].type == Token::Punct && toks[i].text == p;
    }
    bool is_ident(size_t i, std::string_view name) const {
        return i < toks.size() && toks[i].type == Token::Ident && toks[i].text == name;
    }

    // Index of the token matching the opener at `open_idx` ('{','(','<','[').
    // Returns toks.size() when unbalanced.
    size_t find_match(size_t open_idx, char open, char close) const {
        int depth = 0;
        for (size_t i = open_idx; i < toks.size(); ++i) {
            if (toks[i].type != Token::Punct || toks[i].text.size() != 1) continue;
            char c = toks[i].text[0];
            if (c == open) ++depth;
            else if (c == close && --depth == 0) return i;
        }
        return toks.size();
    }

    std::string text_between(size_t first_tok, size_t last_tok) const {
        if (first_tok >= toks.size() || last_tok >= toks.size() || last_tok < first_tok)
            return {};
        return std::string(
            src.substr(toks[first_tok].start, toks[last_tok].end - toks[first_tok].start));
    }

    // --- callsite scanning -------------------------------------------------

    // Reads an identifier chain `a::b::~c` starting at i; returns index past it.
    size_t read_chain(size_t i, std::string& out) const {
        size_t j = i;
        while (j < toks.size()) {
            if (is_punct(j, "~")) {
                out += "~";
                ++j;
                continue;
            }
            if (toks[j].type != Token::Ident) break;
            out += std::string(toks[j].text);
            ++j;
            if (is_punct(j, "::")) {
                out += "::";
                ++j;
                continue;
            }
            break;
        }
        return j;
    }

    std::vector<std::string> call_args(size_t open_paren) const {
        std::vector<std::string> args;
        size_t close = find_match(open_paren, '(', ')');
        if (close >= toks.size()) return args;
        size_t arg_start = open_paren + 1;
        int depth = 0;
        for (size_t i = open_paren + 1; i <= close; ++i) {
            bool at_end = i == close;
            if (toks[i].type == Token::Punct && toks[i].text.size() == 1) {
                char c = toks[i].text[0];
                if (c == '(' || c == '[' || c == '{') ++depth;
                if (c == ')' || c == ']' || c == '}') --depth;
            }
            if (at_end || (depth == 0 && is_punct(i, ","))) {
                if (i > arg_start) {
                    std::string a = text_between(arg_start, i - 1);
                    if (a.size() > 200) a.resize(200);
                    if (args.size() < 8) args.push_back(std::move(a));
                }
                arg_start = i + 1;
            }
        }
        return args;
    }

    // Scans tokens [i, end) for call expressions, appending to `out`.
    void scan_calls(size_t i, size_t end, std::vector<SyntaxNode>& out) const {
        while (i < end) {
            if (toks[i].type == Token::Ident && !kNotCallee.count(toks[i].text)) {
                std::string chain;
                size_t after = read_chain(i, chain);
                size_t call_paren = toks.size();
                if (after < end && is_punct(after, "(")) {
                    call_paren = after;
                } else if (after < end && is_punct(after, "<")) {
                    // possible template arguments: short balanced scan
                    size_t close = find_match(after, '<', '>');
                    if (close < end && close - after <= 30 && is_punct(close + 1, "(")) {
                        bool clean = true;
                        for (size_t k = after; k <= close && clean; ++k)
                            if (is_punct(k, ";") || is_punct(k, "{")) clean = false;
                        if (clean) call_paren = close + 1;
                    }
                }
                if (call_paren < end && !chain.empty()) {
                    SyntaxNode call;
                    call.kind = "call_expression";
                    call.name = chain;
                    size_t close = find_match(call_paren, '(', ')');
                    call.span = {toks[i].start,
                                 close < toks.size() ? toks[close].end : toks[end - 1].end};
                    call.args = call_args(call_paren);
                    out.push_back(std::move(call));
                    i = call_paren + 1;  // keep scanning inside the args
                    continue;
                }
                i = after > i ? after : i + 1;
                continue;
            }
            ++i;
        }
    }

    // --- declaration scanning ----------------------------------------------

    // Parses tokens [i, end) as declarations in scope `prefix`; fills children.
    void parse_decls(size_t i, size_t end, const std::string& prefix,
                     std::vector<SyntaxNode>& out) {
        while (i < end) {
            const Token& t = toks[i];
            if (t.type == Token::Preproc) {
                handle_preproc(i, out);
                ++i;
                continue;
            }
            if (is_punct(i, ";") || is_punct(i, "}")) {
                ++i;
                continue;
            }
            if (t.type == Token::Ident && (t.text == "public" || t.text == "private" ||
                                           t.text == "protected")) {
                // access specifier: skip "name :"
                i += is_punct(i + 1, ":") ? 2 : 1;
                continue;
            }
            if (is_ident(i, "template")) {
                if (is_punct(i + 1, "<")) {
                    size_t close = find_match(i + 1, '<', '>');
                    i = close < end ? close + 1 : end;
                } else {
                    ++i;
                }
                continue;
            }
            if (is_ident(i, "extern") && i + 1 < end && toks[i + 1].type == Token::String &&
                is_punct(i + 2, "{")) {
                size_t close = find_match(i + 2, '{', '}');
                if (close >= end) {
                    emit_error(i + 2, end, out);
                    return;
                }
                parse_decls(i + 3, close, prefix, out);
                i = close + 1;
                continue;
            }
            if (is_ident(i, "namespace")) {
                i = parse_namespace(i, end, prefix, out);
                continue;
            }
            if (t.type == Token::Ident && kTypeIntro.count(t.text) && t.text != "namespace") {
                size_t next = parse_type_decl(i, end, prefix, out);
                if (next > i) {
                    i = next;
                    continue;
                }
            }
            // generic declaration unit
            i = parse_unit(i, end, prefix, out);
        }
    }

    void handle_preproc(size_t i, std::vector<SyntaxNode>& out) const {
        std::string_view line = toks[i].text;
        size_t inc = line.find("include");
        if (inc == std::string_view::npos || line.find_first_not_of("# \t") != inc) return;
        size_t q1 = line.find_first_of("\"<", inc);
        if (q1 == std::string_view::npos) return;
        char closec = line[q1] == '<' ? '>' : '"';
        size_t q2 = line.find(closec, q1 + 1);
        if (q2 == std::string_view::npos) return;
        SyntaxNode node;
        node.kind = "preproc_include";
        node.detail = std::string(line.substr(q1 + 1, q2 - q1 - 1));
        node.name = node.detail;
        node.span = {toks[i].start, toks[i].end};
        if (line[q1] == '<') node.args.push_back("<>");
        out.push_back(std::move(node));
    }

    size_t parse_namespace(size_t i, size_t end, const std::string& prefix,
                           std::vector<SyntaxNode>& out) {
        size_t j = i + 1;
        std::string name;
        while (j < end && toks[j].type == Token::Ident) {
            if (!name.empty()) name += "::";
            name += std::string(toks[j].text);
            ++j;
            if (is_punct(j, "::")) ++j;
            else break;
        }
        if (is_punct(j, "=")) {  // namespace alias
            while (j < end && !is_punct(j, ";")) ++j;
            return j + 1;
        }
        if (!is_punct(j, "{")) {
            while (j < end && !is_punct(j, ";") && !is_punct(j, "{")) ++j;
            return j < end ? j + 1 : end;
        }
        size_t close = find_match(j, '{', '}');
        if (close >= toks.size()) {
            emit_error(j, end, out);
            return end;
        }
        SyntaxNode node;
        node.kind = "namespace_definition";
        node.name = name;
        node.span = {toks[i].start, toks[close].end};
        std::string inner = name.empty() ? prefix : prefix + name + "::";
        parse_decls(j + 1, std::min(close, end), inner, node.children);
        out.push_back(std::move(node));
        return std::min(close, end) + 1;
    }

    // class/struct/enum/union. Returns index after the construct, or i when
    // this is actually an elaborated type in a declaration ("struct X f();").
    size_t parse_type_decl(size_t i, size_t end, const std::string& prefix,
                           std::vector<SyntaxNode>& out) {
        std::string_view kw = toks[i].text;
        size_t j = i + 1;
        if (kw == "enum" && (is_ident(j, "class") || is_ident(j, "struct"))) ++j;
        std::string name;
        if (j < end && toks[j].type == Token::Ident) {
            name = std::string(toks[j].text);
            ++j;
        }
        // skip final/base clause up to '{' or ';'
        size_t k = j;
        while (k < end && !is_punct(k, "{") && !is_punct(k, ";") && !is_punct(k, "(")) ++k;
        if (k >= end) return i + 1;
        if (is_punct(k, "(")) return 0;  // elaborated type in a declaration
        std::string kind = kw == "class"    ? "class_specifier"
                           : kw == "struct" ? "struct_specifier"
                           : kw == "enum"   ? "enum_specifier"
                                            : "struct_specifier";
        if (is_punct(k, ";")) {
            if (name.empty()) return k + 1;
            SyntaxNode node;
            node.kind = kind;
            node.name = prefix + name;
            node.detail = "forward";
            node.span = {toks[i].start, toks[k].end};
            out.push_back(std::move(node));
            return k + 1;
        }
        size_t close = find_match(k, '{', '}');
        if (close >= toks.size()) {
            emit_error(k, end, out);
            return end;
        }
        SyntaxNode node;
        node.kind = kind;
        node.name = name.empty() ? prefix + "(anonymous)" : prefix + name;
        size_t span_end = close;
        if (is_punct(close + 1, ";")) span_end = close + 1;
        node.span = {toks[i].start, toks[span_end].end};
        if (kw != "enum" && !name.empty())
            parse_decls(k + 1, close, prefix + name + "::", node.children);
        out.push_back(std::move(node));
        return span_end + 1;
    }

    void emit_error(size_t from, size_t end, std::vector<SyntaxNode>& out) const {
        SyntaxNode err;
        err.kind = "ERROR";
        uint32_t start = from < toks.size() ? toks[from].start : 0;
        uint32_t stop = end > 0 && end - 1 < toks.size() ? toks[end - 1].end
                                                         : static_cast<uint32_t>(src.size());
        err.span = {start, std::max(start, stop)};
        out.push_back(std::move(err));
    }

    // One declaration unit starting at i: ends at ';' or a brace construct.
    size_t parse_unit(size_t i, size_t end, const std::string& prefix,
                      std::vector<SyntaxNode>& out) {
        size_t j = i;
        int paren_depth = 0;
        size_t last_top_close_paren = toks.size();
        while (j < end) {
            if (toks[j].type == Token::Preproc) {
                ++j;
                continue;
            }
            if (is_punct(j, "(")) ++paren_depth;
            else if (is_punct(j, ")")) {
                --paren_depth;
                if (paren_depth == 0) last_top_close_paren = j;
            } else if (paren_depth == 0) {
                if (is_punct(j, ";")) break;
                if (is_punct(j, "{")) {
                    // initializer braces ("= {...}", "{1,2}") are not bodies
                    bool body = true;
                    if (j > i) {
                        const Token& prev = toks[j - 1];
                        if (prev.type == Token::Punct &&
                            (prev.text == "=" || prev.text == "," || prev.text == "("))
                            body = false;
                    }
                    if (!body) {
                        size_t close = find_match(j, '{', '}');
                        if (close >= toks.size()) {
                            emit_error(j, end, out);
                            return end;
                        }
                        j = close + 1;
                        continue;
                    }
                    break;
                }
            }
            ++j;
        }

        if (j >= end) {  // ran off the scope: no node
            return end;
        }

        if (is_punct(j, "{")) {
            size_t close = find_match(j, '{', '}');
            if (close >= toks.size()) {
                emit_error(i, end, out);
                return end;
            }
            std::string name = unit_function_name(i, j, prefix);
            if (!name.empty()) {
                SyntaxNode fn;
                fn.kind = "function_definition";
                fn.name = name;
                fn.span = {toks[i].start, toks[close].end};
                fn.detail = signature_text(i, j, last_top_close_paren);
                scan_calls(j + 1, close, fn.children);
                out.push_back(std::move(fn));
            }
            return close + 1;
        }

        // unit ends with ';'
        std::string name = unit_function_name(i, j, prefix);
        if (!name.empty()) {
            SyntaxNode decl;
            decl.kind = "function_declaration";
            decl.name = name;
            decl.span = {toks[i].start, toks[j].end};
            decl.detail = signature_text(i, j, last_top_close_paren);
            out.push_back(std::move(decl));
        } else if (prefix.find("::") == std::string::npos) {
            // namespace/file-scope variable declaration (skip class members)
            std::string var = unit_variable_name(i, j);
            if (!var.empty()) {
                SyntaxNode decl;
                decl.kind = "variable_declaration";
                decl.name = prefix + var;
                decl.span = {toks[i].start, toks[j].end};
                out.push_back(std::move(decl));
            }
        }
        return j + 1;
    }

    // Function name for a unit spanning [i, stop) where stop is '{' or ';'.
    // Empty string when the unit is not function-shaped.
    std::string unit_function_name(size_t i, size_t stop, const std::string& prefix) const {
        if (is_ident(i, "using") || is_ident(i, "typedef") || is_ident(i, "friend") ||
            is_ident(i, "static_assert") || is_ident(i, "return") || is_ident(i, "goto"))
            return {};
        int paren_depth = 0;
        for (size_t j = i; j < stop; ++j) {
            if (is_punct(j, "(")) {
                ++paren_depth;
                continue;
            }
            if (is_punct(j, ")")) {
                --paren_depth;
                continue;
            }
            if (paren_depth != 0 || toks[j].type != Token::Ident) continue;
            if (kNotCallee.count(toks[j].text) && toks[j].text != "operator") {
                // type keywords are fine as return types; control keywords kill it
                if (toks[j].text == "if" || toks[j].text == "for" || toks[j].text == "while" ||
                    toks[j].text == "switch" || toks[j].text == "return" ||
                    toks[j].text == "do" || toks[j].text == "catch")
                    return {};
                continue;
            }
            if (is_ident(j, "operator")) {
                // operator<symbols>( : name is "operator" + symbol text
                size_t k = j + 1;
                std::string sym;
                while (k < stop && !is_punct(k, "(") && k - j < 6) {
                    sym += std::string(toks[k].text);
                    ++k;
                }
                if (k < stop && is_punct(k, "(")) return prefix + "operator" + sym;
                return {};
            }
            std::string chain;
            size_t after = read_chain(j, chain);
            if (after < stop && is_punct(after, "(")) {
                // guard: bare MACRO(...) unit with no return type
                if (j == i && after == i + 1 && !is_punct(stop, "{")) {
                    bool all_caps = std::all_of(chain.begin(), chain.end(), [](char c) {
                        return std::isupper(static_cast<unsigned char>(c)) || c == '_' ||
                               std::isdigit(static_cast<unsigned char>(c));
                    });
                    if (all_caps) return {};
                }
                return prefix + chain;
            }
            if (after < stop && is_punct(after, "<")) {
                size_t close = find_match(after, '<', '>');
                if (close < stop && is_punct(close + 1, "(") && close - after <= 30)
                    return prefix + chain;
            }
        }
        return {};
    }

    std::string unit_variable_name(size_t i, size_t stop) const {
        // pattern: type tokens ... ident [= expr | [n]] ;
        // name = last ident before '=', '[' or the ';'
        size_t name_tok = toks.size();
        int depth = 0;
        for (size_t j = i; j < stop; ++j) {
            if (is_punct(j, "(") || is_punct(j, "[") || is_punct(j, "{")) ++depth;
            else if (is_punct(j, ")") || is_punct(j, "]") || is_punct(j, "}")) --depth;
            if (depth != 0) continue;
            if (is_punct(j, "=")) break;
            if (toks[j].type == Token::Ident && !kNotCallee.count(toks[j].text) &&
                !kTypeIntro.count(toks[j].text) && toks[j].text != "using" &&
                toks[j].text != "typedef" && toks[j].text != "extern" &&
                toks[j].text != "inline" && toks[j].text != "typename")
                name_tok = j;
        }
        if (name_tok >= toks.size()) return {};
        if (name_tok == i) return {};  // lone identifier: likely macro or label
        return std::string(toks[name_tok].text);
    }

    std::string signature_text(size_t i, size_t stop, size_t last_close_paren) const {
        size_t sig_end = last_close_paren < stop ? last_close_paren : (stop == 0 ? 0 : stop - 1);
        std::string sig = text_between(i, sig_end);
        // collapse whitespace runs for stable card text
        std::string out;
        bool ws = false;
        for (char c : sig) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                ws = true;
                continue;
            }
            if (ws && !out.empty()) out += ' ';
            ws = false;
            out += c;
        }
        if (out.size() > 300) out.resize(300);
        return out;
    }
};

}  // namespace

SyntaxNode parse_c_like(std::string_view src) {
    Parser parser(src);
    SyntaxNode root;
    parser.parse_decls(0, parser.toks.size(), "", root.children);
    return root;
}

}  // namespace qorpilot::syntax::detail
