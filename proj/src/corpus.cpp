#include <impact/corpus.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>

#include <json.hpp>

#include <algorithm>
#include <set>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace impact {

std::string to_string(Reproducibility r) {
    switch (r) {
        case Reproducibility::unknown: return "unknown";
        case Reproducibility::verified: return "verified";
        case Reproducibility::failed: return "failed";
    }
    return "unknown";
}

Reproducibility reproducibility_from_string(const std::string& s) {
    if (s == "unknown") return Reproducibility::unknown;
    if (s == "verified") return Reproducibility::verified;
    if (s == "failed") return Reproducibility::failed;
    throw ParseError("invalid reproducible value: \"" + s + "\"");
}

const PackageSpec* CorpusManifest::find(const std::string& name) const {
    for (const auto& p : packages)
        if (p.name == name) return &p;
    return nullptr;
}

namespace {

void reject_unknown_fields(const ordered_json& obj, const std::set<std::string>& allowed,
                           const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ParseError("unknown field \"" + it.key() + "\" in " + context);
    }
}

bool has_cxx_extension(const fs::path& p) {
    static const std::set<std::string> exts = {".c", ".h", ".cc", ".cpp",
                                               ".cxx", ".hh", ".hpp"};
    return exts.count(p.extension().string()) > 0;
}

// Code lines remaining after // and /* */ stripping. `in_block` carries block
// comment state across lines.
long long count_code_lines(const std::string& text) {
    long long count = 0;
    bool in_block = false;
    for (const auto& line : split_lines(text)) {
        bool has_code = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (in_block) {
                if (line[i] == '*' && i + 1 < line.size() && line[i + 1] == '/') {
                    in_block = false;
                    ++i;
                }
                continue;
            }
            if (line[i] == '/' && i + 1 < line.size()) {
                if (line[i + 1] == '/') break;  // rest of line is comment
                if (line[i + 1] == '*') {
                    in_block = true;
                    ++i;
                    continue;
                }
            }
            if (!isspace(static_cast<unsigned char>(line[i]))) has_code = true;
        }
        if (has_code) ++count;
    }
    return count;
}

}  // namespace

long long count_loc(const fs::path& source_path) {
    if (!fs::exists(source_path))
        throw IoError("source path does not exist: " + source_path.string());
    if (fs::is_regular_file(source_path)) {
        return has_cxx_extension(source_path) ? count_code_lines(read_file(source_path)) : 0;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(source_path)) {
        if (entry.is_regular_file() && has_cxx_extension(entry.path()))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    long long total = 0;
    for (const auto& f : files) total += count_code_lines(read_file(f));
    return total;
}

void validate_manifest(const CorpusManifest& manifest) {
    std::set<std::string> seen;
    for (const auto& pkg : manifest.packages) {
        if (pkg.name.empty())
            throw ValidationError("manifest entry with empty name");
        if (!seen.insert(pkg.name).second)
            throw ValidationError("duplicate package name \"" + pkg.name + "\"");
        if (pkg.artifact_globs.empty())
            throw ValidationError("package \"" + pkg.name + "\" has no artifact_globs");
        if (pkg.loc < 0)
            throw ValidationError("package \"" + pkg.name + "\" has negative loc");
    }
}

CorpusManifest load_manifest(const fs::path& path) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed manifest " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("manifest root must be an object");
    reject_unknown_fields(doc, {"min_loc", "created_at", "packages"}, "manifest");

    CorpusManifest m;
    try {
        m.min_loc = doc.value("min_loc", 0LL);
        m.created_at = doc.value("created_at", std::string());
        for (const auto& entry : doc.at("packages")) {
            reject_unknown_fields(entry,
                                  {"name", "version", "source_path", "build_cmd",
                                   "test_cmd", "artifact_globs", "loc", "reproducible"},
                                  "package \"" + entry.value("name", std::string("?")) + "\"");
            PackageSpec pkg;
            pkg.name = entry.at("name").get<std::string>();
            pkg.version = entry.value("version", std::string());
            pkg.source_path = entry.at("source_path").get<std::string>();
            pkg.build_cmd = entry.at("build_cmd").get<std::string>();
            if (entry.contains("test_cmd") && !entry["test_cmd"].is_null())
                pkg.test_cmd = entry["test_cmd"].get<std::string>();
            pkg.artifact_globs = entry.at("artifact_globs").get<std::vector<std::string>>();
            if (entry.contains("loc"))
                pkg.loc = entry["loc"].get<long long>();
            else
                pkg.loc = count_loc(pkg.source_path);
            pkg.reproducible = reproducibility_from_string(
                entry.value("reproducible", std::string("unknown")));
            m.packages.push_back(std::move(pkg));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed manifest " + path.string() + ": " + e.what());
    }
    validate_manifest(m);
    return m;
}

void save_manifest(const CorpusManifest& manifest, const fs::path& path) {
    ordered_json doc;
    doc["min_loc"] = manifest.min_loc;
    doc["created_at"] = manifest.created_at;
    doc["packages"] = ordered_json::array();
    for (const auto& pkg : manifest.packages) {
        ordered_json entry;
        entry["name"] = pkg.name;
        entry["version"] = pkg.version;
        entry["source_path"] = pkg.source_path.string();
        entry["build_cmd"] = pkg.build_cmd;
        entry["test_cmd"] = pkg.test_cmd ? ordered_json(*pkg.test_cmd) : ordered_json(nullptr);
        entry["artifact_globs"] = pkg.artifact_globs;
        entry["loc"] = pkg.loc;
        entry["reproducible"] = to_string(pkg.reproducible);
        doc["packages"].push_back(std::move(entry));
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

CorpusManifest filter_corpus(const CorpusManifest& manifest, long long min_loc,
                             bool require_reproducible) {
    CorpusManifest out;
    out.min_loc = min_loc;
    out.created_at = manifest.created_at;
    for (const auto& pkg : manifest.packages) {
        if (pkg.loc < min_loc) continue;
        if (require_reproducible && pkg.reproducible != Reproducibility::verified) continue;
        out.packages.push_back(pkg);
    }
    return out;
}

}  // namespace impact
