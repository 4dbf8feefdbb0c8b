#include "qorpilot/support/fsutil.hpp"

#include <algorithm>
#include <fstream>

namespace fs = std::filesystem;

namespace qorpilot {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + p.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + p.string());
    return data;
}

void write_file(const fs::path& p, std::string_view data) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + p.string());
}

void write_file_atomic(const fs::path& p, std::string_view data) {
    fs::path tmp = p;
    tmp += ".tmp";
    write_file(tmp, data);
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("atomic rename failed: " + p.string() + ": " + ec.message());
}

std::vector<std::string> list_files_recursive(const fs::path& root) {
    if (!fs::exists(root) || !fs::is_directory(root))
        throw IoError("not a directory: " + root.string());
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(
             root, fs::directory_options::skip_permission_denied)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), root).generic_string();
        out.push_back(std::move(rel));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void copy_tree(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    for (const auto& rel : list_files_recursive(from)) {
        fs::path dst = to / rel;
        if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
        fs::copy_file(from / rel, dst, fs::copy_options::overwrite_existing);
    }
}

bool is_valid_utf8(std::string_view bytes) {
    size_t i = 0;
    const size_t n = bytes.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        size_t extra;
        uint32_t min_cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            min_cp = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            min_cp = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            min_cp = 0x10000;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        uint32_t cp = c & (0x3F >> extra);
        for (size_t k = 1; k <= extra; ++k) {
            unsigned char cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += extra + 1;
    }
    return true;
}

}  // namespace qorpilot
