#include "sig_util.hpp"

#include <cctype>

namespace qorpilot::doc::detail {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::vector<std::string> split_tcl_args(const std::string& args) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < args.size()) {
        while (i < args.size() && std::isspace(static_cast<unsigned char>(args[i]))) ++i;
        if (i >= args.size()) break;
        size_t start = i;
        if (args[i] == '{') {
            int depth = 0;
            while (i < args.size()) {
                if (args[i] == '{') ++depth;
                if (args[i] == '}' && --depth == 0) {
                    ++i;
                    break;
                }
                ++i;
            }
        } else {
            while (i < args.size() && !std::isspace(static_cast<unsigned char>(args[i]))) ++i;
        }
        out.push_back(args.substr(start, i - start));
    }
    return out;
}

}  // namespace

std::vector<std::string> split_signature_params(const std::string& signature) {
    std::vector<std::string> out;
    if (signature.rfind("proc ", 0) == 0) {
        size_t open = signature.find('{');
        size_t close = signature.rfind('}');
        if (open == std::string::npos || close == std::string::npos || close <= open)
            return out;
        return split_tcl_args(signature.substr(open + 1, close - open - 1));
    }
    size_t open = signature.find('(');
    size_t close = signature.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close <= open) return out;
    std::string params = signature.substr(open + 1, close - open - 1);
    if (trim(params).empty() || trim(params) == "void") return out;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i <= params.size(); ++i) {
        if (i < params.size()) {
            char c = params[i];
            if (c == '(' || c == '<' || c == '[' || c == '{') ++depth;
            if (c == ')' || c == '>' || c == ']' || c == '}') --depth;
            if (c != ',' || depth != 0) continue;
        }
        std::string p = trim(params.substr(start, i - start));
        start = i + 1;
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

std::string param_name(const std::string& param) {
    std::string p = trim(param);
    if (!p.empty() && p.front() == '{') {
        // tcl "{name default}"
        size_t sp = p.find(' ');
        if (sp != std::string::npos) return p.substr(1, sp - 1);
        return p.size() > 2 ? p.substr(1, p.size() - 2) : std::string();
    }
    size_t eq = p.find('=');
    if (eq != std::string::npos) p = trim(p.substr(0, eq));
    size_t cut = p.find_last_of(" \t*&");
    return cut == std::string::npos ? p : p.substr(cut + 1);
}

}  // namespace qorpilot::doc::detail
