// Unified-diff parsing and application over in-memory file texts.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qorpilot/support/error.hpp"

namespace qorpilot {

QORPILOT_DEFINE_ERROR(MalformedPatch);
QORPILOT_DEFINE_ERROR(HunkApplyFailed);

struct DiffLine {
    char tag;  // ' ', '+', '-'
    std::string text;
};

struct Hunk {
    size_t old_start = 1;  // 1-based line numbers from the @@ header
    size_t old_count = 0;
    size_t new_start = 1;
    size_t new_count = 0;
    std::vector<DiffLine> lines;
};

struct FilePatch {
    std::string old_path;  // stripped of a/ b/ prefixes
    std::string new_path;
    std::vector<Hunk> hunks;
    bool is_new_file() const { return old_path == "/dev/null"; }
    bool is_delete() const { return new_path == "/dev/null"; }
    const std::string& target_path() const { return is_delete() ? old_path : new_path; }
};

// Parses a (possibly multi-file) unified diff. Empty input -> empty patch set.
std::vector<FilePatch> parse_unified_diff(const std::string& patch_text);

struct HunkApplyOptions {
    // Extra line offset to try first (from span re-anchoring); the applier
    // also fuzz-searches around the header position.
    long offset_hint = 0;
    long max_fuzz_distance = 200;
};

// Applies one file's hunks to `content`. Throws HunkApplyFailed when context
// cannot be located.
std::string apply_file_patch(const FilePatch& patch, const std::string& content,
                             const HunkApplyOptions& opts = {});

}  // namespace qorpilot
