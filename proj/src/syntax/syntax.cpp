#include "qorpilot/syntax/syntax.hpp"

#include <algorithm>

#include "qorpilot/support/fsutil.hpp"
#include "parsers.hpp"

namespace qorpilot::syntax {

std::string_view language_name(Language lang) {
    switch (lang) {
        case Language::C: return "C";
        case Language::Cpp: return "Cpp";
        case Language::Tcl: return "Tcl";
        case Language::Python: return "Python";
        case Language::Verilog: return "Verilog";
        case Language::Other: return "Other";
    }
    return "Other";
}

Language language_for_path(std::string_view path) {
    size_t dot = path.rfind('.');
    if (dot == std::string_view::npos) return Language::Other;
    std::string ext(path.substr(dot));
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".c") return Language::C;
    if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".h" || ext == ".hh" ||
        ext == ".hpp" || ext == ".hxx" || ext == ".inl")
        return Language::Cpp;
    if (ext == ".tcl" || ext == ".itcl") return Language::Tcl;
    if (ext == ".py") return Language::Python;
    if (ext == ".v" || ext == ".sv" || ext == ".vh" || ext == ".svh") return Language::Verilog;
    return Language::Other;
}

SyntaxTree parse_source(std::string_view file_bytes, Language language) {
    if (language == Language::Other)
        throw UnsupportedLanguage("no parser for language 'Other'");
    if (!is_valid_utf8(file_bytes))
        throw UndecodableBytes("input is not valid UTF-8");

    SyntaxTree tree;
    tree.language = language;
    switch (language) {
        case Language::C:
        case Language::Cpp:
            tree.root = detail::parse_c_like(file_bytes);
            break;
        case Language::Tcl:
            tree.root = detail::parse_tcl(file_bytes);
            break;
        case Language::Python:
            tree.root = detail::parse_python(file_bytes);
            break;
        case Language::Verilog:
            tree.root = detail::parse_verilog(file_bytes);
            break;
        case Language::Other:
            break;  // unreachable
    }
    tree.root.kind = "source_file";
    tree.root.span = {0, static_cast<uint32_t>(file_bytes.size())};
    return tree;
}

}  // namespace qorpilot::syntax
