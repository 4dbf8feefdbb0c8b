// Concrete-syntax scanners for the languages the graph understands. Each one
// produces a traversable tree of named nodes with byte spans; parse trouble
// becomes ERROR-kind subtrees, never a thrown failure.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qorpilot/support/error.hpp"

namespace qorpilot::syntax {

QORPILOT_DEFINE_ERROR(UnsupportedLanguage);
QORPILOT_DEFINE_ERROR(UndecodableBytes);

enum class Language { C, Cpp, Tcl, Python, Verilog, Other };

std::string_view language_name(Language lang);
// Maps a file extension (e.g. ".cpp") to a language; Other when unknown.
Language language_for_path(std::string_view path);

struct Span {
    uint32_t start = 0;
    uint32_t end = 0;  // half-open [start, end)
    auto operator<=>(const Span&) const = default;
};

// Node kinds (by language):
//   C/C++ : function_definition, function_declaration, class_specifier,
//           struct_specifier, enum_specifier, namespace_definition,
//           variable_declaration, call_expression, preproc_include, ERROR
//   Tcl   : procedure, command, variable_assignment, import_statement, ERROR
//   Python: function_definition, class_definition, call_expression,
//           import_statement, ERROR
//   Verilog: module_declaration, ERROR
struct SyntaxNode {
    std::string kind;
    std::string name;    // identifier where applicable (qualified for defs)
    Span span;
    std::string detail;  // signature text / include target / module name
    std::vector<std::string> args;  // raw call arguments, trimmed
    std::vector<SyntaxNode> children;
};

struct SyntaxTree {
    Language language = Language::Other;
    SyntaxNode root;  // kind "source_file"
};

// Throws UnsupportedLanguage for Other, UndecodableBytes for invalid UTF-8.
SyntaxTree parse_source(std::string_view file_bytes, Language language);

// Depth-first visit (pre-order).
template <typename Fn>
void visit(const SyntaxNode& node, Fn&& fn) {
    fn(node);
    for (const auto& child : node.children) visit(child, fn);
}

}  // namespace qorpilot::syntax
