#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace impact {

std::string read_file(const std::filesystem::path& path);

// Write-to-temp-then-rename so concurrent readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Recursive copy preserving the tree layout (regular files, directories,
// symlinks, permissions).
void copy_tree(const std::filesystem::path& from, const std::filesystem::path& to);

// Splits text into lines; accepts both "a\nb" and "a\nb\n" without producing a
// trailing empty line, and tolerates \r\n.
std::vector<std::string> split_lines(const std::string& text);

// True iff `rel_path` (generic, '/'-separated) matches the glob pattern.
// '*' matches within a path segment, '?' one character, '**' across segments.
bool glob_match(const std::string& pattern, const std::string& rel_path);

// All regular files under `root` matching any pattern, as sorted relative paths.
std::vector<std::filesystem::path> glob_collect(const std::filesystem::path& root,
                                                const std::vector<std::string>& patterns);

// Digest of a whole directory tree (relative paths + file contents), used to
// assert byte-identical record stores.
std::string tree_digest(const std::filesystem::path& root);

}  // namespace impact
