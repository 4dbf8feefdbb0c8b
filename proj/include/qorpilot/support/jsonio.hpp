// Canonical JSON conventions shared by every artifact writer:
// nlohmann ordered_json, 2-space indent, LF line endings, trailing newline.
#pragma once

#include <string>

#include <json.hpp>

#include "qorpilot/support/error.hpp"

namespace qorpilot {

using Json = nlohmann::ordered_json;

QORPILOT_DEFINE_ERROR(JsonParseError);

inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

// Parse with a typed error carrying the byte offset of the failure.
Json parse_json(std::string_view text, const std::string& what);

// Number formatting used anywhere a real lands in canonical output.
std::string format_double(double v);

}  // namespace qorpilot
