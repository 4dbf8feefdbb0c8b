// Python structural scanner: logical lines + an indentation stack yield
// def/class blocks with byte spans; imports and call expressions are
// extracted per logical line.
#include <cctype>
#include <unordered_set>

#include "parsers.hpp"

namespace qorpilot::syntax::detail {

namespace {

struct LogicalLine {
    std::string text;      // with strings blanked out, comments stripped
    std::string raw;       // original bytes
    uint32_t start = 0;
    uint32_t end = 0;      // end of the last physical line (excl. newline)
    int indent = 0;        // leading whitespace width of the first line
    bool unterminated_string = false;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

const std::unordered_set<std::string> kNotCallee = {
    "if", "elif", "while", "for", "return", "yield", "and", "or", "not", "in",
    "is", "def", "class", "lambda", "with", "assert", "del", "raise", "except",
    "import", "from", "as", "pass", "else", "try", "finally", "global", "nonlocal"};

std::vector<LogicalLine> logical_lines(std::string_view src) {
    std::vector<LogicalLine> lines;
    size_t i = 0;
    const size_t n = src.size();
    while (i < n) {
        LogicalLine ll;
        ll.start = static_cast<uint32_t>(i);
        int indent = 0;
        size_t j = i;
        while (j < n && (src[j] == ' ' || src[j] == '\t')) {
            indent += src[j] == '\t' ? 8 - (indent % 8) : 1;
            ++j;
        }
        ll.indent = indent;

        int depth = 0;
        bool done = false;
        std::string text;
        size_t k = i;
        while (k < n && !done) {
            char c = src[k];
            if (c == '#') {  // comment to EOL
                while (k < n && src[k] != '\n') ++k;
                continue;
            }
            if (c == '\'' || c == '"') {
                char q = c;
                bool triple = k + 2 < n && src[k + 1] == q && src[k + 2] == q;
                size_t close;
                if (triple) {
                    std::string delim(3, q);
                    close = src.find(delim, k + 3);
                    if (close == std::string_view::npos) {
                        ll.unterminated_string = true;
                        k = n;
                        break;
                    }
                    k = close + 3;
                } else {
                    ++k;
                    while (k < n && src[k] != q && src[k] != '\n') {
                        if (src[k] == '\\' && k + 1 < n) ++k;
                        ++k;
                    }
                    if (k < n && src[k] == q) ++k;
                }
                text += "\"S\"";
                continue;
            }
            if (c == '(' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == ']' || c == '}') --depth;
            if (c == '\\' && k + 1 < n && src[k + 1] == '\n') {
                k += 2;
                text += ' ';
                continue;
            }
            if (c == '\n') {
                if (depth <= 0) {
                    done = true;
                    break;
                }
                text += ' ';
                ++k;
                continue;
            }
            text += c;
            ++k;
        }
        ll.end = static_cast<uint32_t>(k);
        ll.raw = std::string(src.substr(i, k - i));
        ll.text = std::move(text);
        lines.push_back(std::move(ll));
        i = k < n ? k + 1 : n;  // skip the newline
    }
    return lines;
}

bool is_blank(const LogicalLine& ll) {
    for (char c : ll.text)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

void scan_calls(const LogicalLine& ll, std::vector<SyntaxNode>& out) {
    const std::string& t = ll.text;
    size_t i = 0;
    while (i < t.size()) {
        if (ident_start(t[i]) && (i == 0 || !ident_char(t[i - 1]))) {
            size_t j = i;
            while (j < t.size() && ident_char(t[j])) ++j;
            std::string name = t.substr(i, j - i);
            while (!name.empty() && name.back() == '.') name.pop_back();
            size_t k = j;
            while (k < t.size() && t[k] == ' ') ++k;
            if (k < t.size() && t[k] == '(' && !kNotCallee.count(name)) {
                SyntaxNode call;
                call.kind = "call_expression";
                call.name = name;
                // last dotted component is the practical callee symbol
                call.detail = name;
                call.span = {ll.start, ll.end};
                // args: split top level commas up to matching paren
                int depth = 0;
                size_t arg_start = k + 1;
                for (size_t p = k; p < t.size(); ++p) {
                    if (t[p] == '(' || t[p] == '[' || t[p] == '{') ++depth;
                    if (t[p] == ')' || t[p] == ']' || t[p] == '}') --depth;
                    bool closing = depth == 0 && t[p] == ')';
                    if ((closing || (depth == 1 && t[p] == ',')) && p > arg_start) {
                        std::string a = t.substr(arg_start, p - arg_start);
                        while (!a.empty() && a.front() == ' ') a.erase(a.begin());
                        while (!a.empty() && a.back() == ' ') a.pop_back();
                        if (!a.empty() && out.size() < 4096 && call.args.size() < 8)
                            call.args.push_back(std::move(a));
                        arg_start = p + 1;
                    }
                    if (closing) break;
                }
                out.push_back(std::move(call));
                i = k + 1;
                continue;
            }
            i = j;
            continue;
        }
        ++i;
    }
}

struct Block {
    int indent;           // indent of the block's body
    SyntaxNode node;      // pending def/class node
    bool is_def;
};

}  // namespace

SyntaxNode parse_python(std::string_view src) {
    SyntaxNode root;
    auto lines = logical_lines(src);

    // stack of open def/class nodes; top receives children
    std::vector<Block> stack;

    auto container = [&]() -> std::vector<SyntaxNode>* {
        return stack.empty() ? &root.children : &stack.back().node.children;
    };
    auto scope_name = [&]() {
        std::string s;
        for (const auto& b : stack) {
            if (!s.empty()) s += ".";
            s += b.node.name.substr(b.node.name.rfind('.') + 1);
        }
        return s;
    };
    auto close_until = [&](int indent, uint32_t pos) {
        while (!stack.empty() && indent <= stack.back().indent) {
            Block b = std::move(stack.back());
            stack.pop_back();
            b.node.span.end = pos;
            (stack.empty() ? root.children : stack.back().node.children)
                .push_back(std::move(b.node));
        }
    };

    uint32_t last_nonblank_end = 0;
    for (const auto& ll : lines) {
        if (is_blank(ll)) continue;
        close_until(ll.indent, last_nonblank_end);
        last_nonblank_end = ll.end;

        const std::string& t = ll.text;
        size_t p = 0;
        while (p < t.size() && std::isspace(static_cast<unsigned char>(t[p]))) ++p;
        std::string_view rest = std::string_view(t).substr(p);

        if (ll.unterminated_string) {
            SyntaxNode err;
            err.kind = "ERROR";
            err.span = {ll.start, ll.end};
            container()->push_back(std::move(err));
            continue;
        }

        auto starts_with_kw = [&](std::string_view kw) {
            return rest.size() > kw.size() && rest.substr(0, kw.size()) == kw &&
                   !ident_char(rest[kw.size()]);
        };

        bool async = starts_with_kw("async");
        std::string_view decl = rest;
        if (async) {
            size_t sp = decl.find_first_not_of(' ', 5);
            decl = sp == std::string_view::npos ? std::string_view{} : decl.substr(sp);
        }
        auto decl_starts = [&](std::string_view kw) {
            return decl.size() > kw.size() && decl.substr(0, kw.size()) == kw &&
                   !ident_char(decl[kw.size()]);
        };

        if (decl_starts("def") || decl_starts("class")) {
            bool is_def = decl_starts("def");
            size_t name_at = decl.find_first_not_of(' ', is_def ? 3 : 5);
            std::string name;
            size_t q = name_at;
            while (q != std::string_view::npos && q < decl.size() &&
                   (std::isalnum(static_cast<unsigned char>(decl[q])) || decl[q] == '_')) {
                name += decl[q];
                ++q;
            }
            Block b;
            b.indent = ll.indent;
            b.is_def = is_def;
            b.node.kind = is_def ? "function_definition" : "class_definition";
            std::string scope = scope_name();
            b.node.name = scope.empty() ? name : scope + "." + name;
            b.node.span = {ll.start, ll.end};
            if (is_def) {
                size_t op = decl.find('(');
                size_t cp = decl.rfind(')');
                if (op != std::string_view::npos && cp != std::string_view::npos && cp > op)
                    b.node.detail = "def " + name + std::string(decl.substr(op, cp - op + 1));
                else
                    b.node.detail = "def " + name + "()";
            }
            stack.push_back(std::move(b));
            continue;
        }
        if (starts_with_kw("import")) {
            // import a.b as c, d
            size_t pos = 6;
            while (pos < rest.size()) {
                while (pos < rest.size() && (rest[pos] == ' ' || rest[pos] == ',')) ++pos;
                std::string mod;
                while (pos < rest.size() && ident_char(rest[pos])) mod += rest[pos++];
                if (mod.empty()) break;
                // skip "as alias"
                size_t save = pos;
                while (save < rest.size() && rest[save] == ' ') ++save;
                if (rest.substr(save).rfind("as ", 0) == 0) {
                    pos = save + 3;
                    while (pos < rest.size() && ident_char(rest[pos])) ++pos;
                }
                SyntaxNode node;
                node.kind = "import_statement";
                node.detail = mod;
                node.name = mod;
                node.span = {ll.start, ll.end};
                container()->push_back(std::move(node));
                while (pos < rest.size() && rest[pos] != ',') ++pos;
            }
            continue;
        }
        if (starts_with_kw("from")) {
            size_t pos = 5;
            while (pos < rest.size() && rest[pos] == ' ') ++pos;
            std::string mod;
            while (pos < rest.size() && ident_char(rest[pos])) mod += rest[pos++];
            if (!mod.empty()) {
                SyntaxNode node;
                node.kind = "import_statement";
                node.detail = mod;
                node.name = mod;
                node.span = {ll.start, ll.end};
                container()->push_back(std::move(node));
            }
            continue;
        }
        scan_calls(ll, *container());
    }
    close_until(0, last_nonblank_end);
    return root;
}

}  // namespace qorpilot::syntax::detail
