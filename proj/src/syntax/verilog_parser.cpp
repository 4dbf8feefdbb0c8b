// Verilog scanner: module declarations only (designs are flow inputs, not
// engine code).
#include <cctype>

#include "parsers.hpp"

namespace qorpilot::syntax::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

SyntaxNode parse_verilog(std::string_view src) {
    SyntaxNode root;
    size_t i = 0;
    const size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            size_t close = src.find("*/", i + 2);
            i = close == std::string_view::npos ? n : close + 2;
            continue;
        }
        if (c == '"') {
            ++i;
            while (i < n && src[i] != '"' && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n) ++i;
                ++i;
            }
            if (i < n) ++i;
            continue;
        }
        if (ident_start(c)) {
            size_t start = i;
            while (i < n && ident_char(src[i])) ++i;
            std::string_view word = src.substr(start, i - start);
            if (word == "module" || word == "macromodule") {
                while (i < n && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
                std::string name;
                while (i < n && ident_char(src[i])) name += src[i++];
                size_t end_kw = src.find("endmodule", i);
                SyntaxNode node;
                if (end_kw == std::string_view::npos) {
                    node.kind = "ERROR";
                    node.span = {static_cast<uint32_t>(start), static_cast<uint32_t>(n)};
                    root.children.push_back(std::move(node));
                    break;
                }
                node.kind = "module_declaration";
                node.name = name;
                node.span = {static_cast<uint32_t>(start),
                             static_cast<uint32_t>(end_kw + 9)};
                root.children.push_back(std::move(node));
                i = end_kw + 9;
            }
            continue;
        }
        ++i;
    }
    return root;
}

}  // namespace qorpilot::syntax::detail
