#include "qorpilot/support/jsonio.hpp"

#include <charconv>

namespace qorpilot {

Json parse_json(std::string_view text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw JsonParseError(what + ": " + e.what() + " (byte " + std::to_string(e.byte) + ")");
    }
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

}  // namespace qorpilot
