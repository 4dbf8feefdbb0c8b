// Path glob matching: `*` and `?` within one path segment, `**` across segments,
// `[...]` character classes. Separator is always '/'.
#pragma once

#include <string_view>

#include "qorpilot/support/error.hpp"

namespace qorpilot {

QORPILOT_DEFINE_ERROR(InvalidGlob);

// Throws InvalidGlob on malformed patterns (unterminated character class).
void validate_glob(std::string_view pattern);

bool glob_match(std::string_view pattern, std::string_view path);

}  // namespace qorpilot
