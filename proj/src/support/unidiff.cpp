#include "qorpilot/support/unidiff.hpp"

#include <algorithm>
#include <cstdlib>

namespace qorpilot {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            lines.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    if (start < text.size()) lines.push_back(text.substr(start));
    return lines;
}

std::string strip_prefix(std::string path) {
    if (path.rfind("a/", 0) == 0 || path.rfind("b/", 0) == 0) return path.substr(2);
    return path;
}

std::string parse_path(const std::string& line, size_t tag_len) {
    std::string rest = line.substr(tag_len);
    // strip trailing tab-separated timestamp if present
    size_t tab = rest.find('\t');
    if (tab != std::string::npos) rest = rest.substr(0, tab);
    while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\r')) rest.pop_back();
    return strip_prefix(rest);
}

bool parse_hunk_header(const std::string& line, Hunk& h) {
    // @@ -l[,c] +l[,c] @@
    if (line.rfind("@@ -", 0) != 0) return false;
    const char* p = line.c_str() + 4;
    char* end = nullptr;
    h.old_start = std::strtoul(p, &end, 10);
    h.old_count = 1;
    if (*end == ',') h.old_count = std::strtoul(end + 1, &end, 10);
    while (*end == ' ') ++end;
    if (*end != '+') return false;
    h.new_start = std::strtoul(end + 1, &end, 10);
    h.new_count = 1;
    if (*end == ',') h.new_count = std::strtoul(end + 1, &end, 10);
    return true;
}

}  // namespace

std::vector<FilePatch> parse_unified_diff(const std::string& patch_text) {
    std::vector<FilePatch> patches;
    auto lines = split_lines(patch_text);
    FilePatch* current = nullptr;
    Hunk* hunk = nullptr;

    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.rfind("--- ", 0) == 0) {
            if (i + 1 >= lines.size() || lines[i + 1].rfind("+++ ", 0) != 0)
                throw MalformedPatch("'---' header without '+++' at line " + std::to_string(i + 1));
            patches.emplace_back();
            current = &patches.back();
            current->old_path = parse_path(line, 4);
            current->new_path = parse_path(lines[i + 1], 4);
            hunk = nullptr;
            ++i;
        } else if (line.rfind("@@", 0) == 0) {
            if (!current)
                throw MalformedPatch("hunk header before file header at line " + std::to_string(i + 1));
            Hunk h;
            if (!parse_hunk_header(line, h))
                throw MalformedPatch("bad hunk header: " + line);
            current->hunks.push_back(h);
            hunk = &current->hunks.back();
        } else if (hunk && !line.empty() && (line[0] == ' ' || line[0] == '+' || line[0] == '-')) {
            std::string text = line.substr(1);
            if (!text.empty() && text.back() == '\r') text.pop_back();
            hunk->lines.push_back({line[0], std::move(text)});
        } else if (hunk && line.rfind("\\ No newline", 0) == 0) {
            // tolerated; applier keeps a trailing newline policy of its own
        } else if (hunk && line.empty()) {
            // blank context line with the leading space trimmed by transport
            hunk->lines.push_back({' ', ""});
        }
        // anything else (diff --git, index, mode lines) is ignored
    }
    return patches;
}

namespace {

// True when hunk's old-side lines match `lines` starting at pos (0-based).
bool hunk_matches_at(const Hunk& h, const std::vector<std::string>& lines, size_t pos) {
    size_t idx = pos;
    for (const auto& dl : h.lines) {
        if (dl.tag == '+') continue;
        if (idx >= lines.size() || lines[idx] != dl.text) return false;
        ++idx;
    }
    return true;
}

}  // namespace

std::string apply_file_patch(const FilePatch& patch, const std::string& content,
                             const HunkApplyOptions& opts) {
    if (patch.is_new_file()) {
        std::string out;
        for (const auto& h : patch.hunks)
            for (const auto& dl : h.lines)
                if (dl.tag == '+') out += dl.text + "\n";
        return out;
    }

    std::vector<std::string> lines = split_lines(content);
    bool had_trailing_newline = content.empty() || content.back() == '\n';
    long drift = 0;  // cumulative line delta from applied hunks

    for (const auto& h : patch.hunks) {
        long base = static_cast<long>(h.old_start) - 1 + drift + opts.offset_hint;
        // empty old side (pure insertion): position directly
        size_t found = std::string::npos;
        for (long dist = 0; dist <= opts.max_fuzz_distance; ++dist) {
            for (long sign : {1L, -1L}) {
                if (dist == 0 && sign < 0) continue;
                long pos = base + sign * dist;
                if (pos < 0 || pos > static_cast<long>(lines.size())) continue;
                if (hunk_matches_at(h, lines, static_cast<size_t>(pos))) {
                    found = static_cast<size_t>(pos);
                    break;
                }
            }
            if (found != std::string::npos) break;
        }
        if (found == std::string::npos)
            throw HunkApplyFailed("hunk context not found near line " +
                                  std::to_string(h.old_start));

        std::vector<std::string> replacement;
        size_t old_len = 0;
        for (const auto& dl : h.lines) {
            if (dl.tag != '-') replacement.push_back(dl.text);
            if (dl.tag != '+') ++old_len;
        }
        lines.erase(lines.begin() + static_cast<long>(found),
                    lines.begin() + static_cast<long>(found + old_len));
        lines.insert(lines.begin() + static_cast<long>(found), replacement.begin(),
                     replacement.end());
        drift += static_cast<long>(replacement.size()) - static_cast<long>(old_len);
    }

    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 < lines.size() || had_trailing_newline) out += "\n";
    }
    return out;
}

}  // namespace qorpilot
