// Internal: per-language scanner entry points.
#pragma once

#include "qorpilot/syntax/syntax.hpp"

namespace qorpilot::syntax::detail {

SyntaxNode parse_c_like(std::string_view src);  // C and C++
SyntaxNode parse_tcl(std::string_view src);
SyntaxNode parse_python(std::string_view src);
SyntaxNode parse_verilog(std::string_view src);

}  // namespace qorpilot::syntax::detail
