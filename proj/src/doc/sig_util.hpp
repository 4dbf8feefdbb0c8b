// Internal: signature parameter splitting shared by synthesis and validation.
#pragma once

#include <string>
#include <vector>

namespace qorpilot::doc::detail {

// Parameter declarator texts of a signature. Understands paren-style
// ("int f(int a, double b = 1)") and Tcl proc-style ("proc p {a {b 8}}").
std::vector<std::string> split_signature_params(const std::string& signature);

// "int k = 8" -> "k"; "{b 8}" -> "b"; "self" -> "self"
std::string param_name(const std::string& param);

}  // namespace qorpilot::doc::detail
