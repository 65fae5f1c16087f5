#include <impact/fsutil.hpp>

#include <impact/errors.hpp>
#include <impact/sha256.hpp>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;

namespace impact {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path.string());
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open file for writing: " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) throw IoError("write failure: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

void copy_tree(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::copy(from, to,
             fs::copy_options::recursive | fs::copy_options::copy_symlinks,
             ec);
    if (ec) throw IoError("copy failed: " + from.string() + " -> " + to.string() +
                          ": " + ec.message());
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        size_t end = nl == std::string::npos ? text.size() : nl;
        size_t len = end - pos;
        if (len > 0 && text[pos + len - 1] == '\r') --len;
        lines.emplace_back(text, pos, len);
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return lines;
}

namespace {

std::regex glob_to_regex(const std::string& pattern) {
    std::string re;
    re.reserve(pattern.size() * 2);
    for (size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        switch (c) {
            case '*':
                if (i + 1 < pattern.size() && pattern[i + 1] == '*') {
                    re += ".*";
                    ++i;
                } else {
                    re += "[^/]*";
                }
                break;
            case '?':
                re += "[^/]";
                break;
            case '.': case '+': case '(': case ')': case '[': case ']':
            case '{': case '}': case '^': case '$': case '|': case '\\':
                re.push_back('\\');
                re.push_back(c);
                break;
            default:
                re.push_back(c);
        }
    }
    return std::regex(re);
}

}  // namespace

bool glob_match(const std::string& pattern, const std::string& rel_path) {
    return std::regex_match(rel_path, glob_to_regex(pattern));
}

std::vector<fs::path> glob_collect(const fs::path& root,
                                   const std::vector<std::string>& patterns) {
    std::vector<std::regex> regexes;
    regexes.reserve(patterns.size());
    for (const auto& p : patterns) regexes.push_back(glob_to_regex(p));

    std::vector<fs::path> out;
    if (!fs::exists(root)) return out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        fs::path rel = fs::relative(entry.path(), root);
        std::string rel_str = rel.generic_string();
        for (const auto& re : regexes) {
            if (std::regex_match(rel_str, re)) {
                out.push_back(rel);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string tree_digest(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file())
            files.push_back(fs::relative(entry.path(), root));
    }
    std::sort(files.begin(), files.end());
    Sha256 h;
    for (const auto& rel : files) {
        h.update(rel.generic_string());
        h.update("\0", 1);
        h.update(sha256_file_hex(root / rel));
        h.update("\n", 1);
    }
    return h.hex_digest();
}

}  // namespace impact
