#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qorpilot/support/error.hpp"

namespace qorpilot {

QORPILOT_DEFINE_ERROR(IoError);

std::string read_file(const std::filesystem::path& p);      // throws IoError
void write_file(const std::filesystem::path& p, std::string_view data);
// Write to a temp file in the same directory, then rename over the target.
void write_file_atomic(const std::filesystem::path& p, std::string_view data);

// Regular files under root, as sorted '/'-separated paths relative to root.
std::vector<std::string> list_files_recursive(const std::filesystem::path& root);

// Recursive copy of a directory tree (regular files only).
void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to);

bool is_valid_utf8(std::string_view bytes);

}  // namespace qorpilot
