#include "qorpilot/support/glob.hpp"

#include <string>
#include <vector>

namespace qorpilot {

namespace {

// Matches text[t] against the class starting at pat[p] (pat[p] == '[').
// Returns the index just past ']' via out param; npos class end means no match.
bool class_match(std::string_view pat, size_t p, char c, size_t& next) {
    size_t scan = p + 1;
    bool negate = false;
    if (scan < pat.size() && (pat[scan] == '!' || pat[scan] == '^')) {
        negate = true;
        ++scan;
    }
    size_t body_start = scan;
    if (scan < pat.size() && pat[scan] == ']') ++scan;  // literal ']' first
    size_t close = pat.find(']', scan);
    if (close == std::string_view::npos) {
        next = std::string_view::npos;
        return false;
    }
    bool hit = false;
    for (size_t i = body_start; i < close; ++i) {
        if (i + 2 < close && pat[i + 1] == '-') {
            if (c >= pat[i] && c <= pat[i + 2]) hit = true;
            i += 2;
        } else if (pat[i] == c) {
            hit = true;
        }
    }
    next = close + 1;
    return hit != negate;
}

// Matches one path segment (no '/' crossing) with *, ? and [...].
bool segment_match(std::string_view pat, std::string_view text) {
    size_t p = 0, t = 0;
    size_t star_p = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        bool advanced = false;
        if (p < pat.size()) {
            if (pat[p] == '*') {
                star_p = ++p;
                star_t = t;
                continue;
            }
            if (pat[p] == '[') {
                size_t next;
                if (class_match(pat, p, text[t], next)) {
                    p = next;
                    ++t;
                    advanced = true;
                }
            } else if (pat[p] == '?' || pat[p] == text[t]) {
                ++p;
                ++t;
                advanced = true;
            }
        }
        if (!advanced) {
            if (star_p == std::string_view::npos) return false;
            p = star_p;
            t = ++star_t;
        }
    }
    while (p < pat.size() && pat[p] == '*') ++p;
    return p == pat.size();
}

std::vector<std::string_view> split_segments(std::string_view s) {
    std::vector<std::string_view> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '/') {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

bool match_segments(const std::vector<std::string_view>& pat, size_t pi,
                    const std::vector<std::string_view>& path, size_t ti) {
    if (pi == pat.size()) return ti == path.size();
    if (pat[pi] == "**") {
        for (size_t skip = ti; skip <= path.size(); ++skip) {
            if (match_segments(pat, pi + 1, path, skip)) return true;
        }
        return false;
    }
    if (ti == path.size()) return false;
    if (!segment_match(pat[pi], path[ti])) return false;
    return match_segments(pat, pi + 1, path, ti + 1);
}

}  // namespace

void validate_glob(std::string_view pattern) {
    if (pattern.empty()) throw InvalidGlob("empty glob pattern");
    for (size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == '[') {
            size_t scan = i + 1;
            if (scan < pattern.size() && (pattern[scan] == '!' || pattern[scan] == '^')) ++scan;
            if (scan < pattern.size() && pattern[scan] == ']') ++scan;  // literal ']'
            size_t close = pattern.find(']', scan);
            if (close == std::string_view::npos)
                throw InvalidGlob("unterminated character class in glob: " + std::string(pattern));
            i = close;
        }
    }
}

bool glob_match(std::string_view pattern, std::string_view path) {
    return match_segments(split_segments(pattern), 0, split_segments(path), 0);
}

}  // namespace qorpilot
