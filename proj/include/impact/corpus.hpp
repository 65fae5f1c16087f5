#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace impact {

enum class Reproducibility { unknown, verified, failed };

std::string to_string(Reproducibility r);
Reproducibility reproducibility_from_string(const std::string& s);

// One buildable corpus entry. build_cmd/test_cmd are shell command templates
// executed in a fresh copy of the source tree; they receive the compiler
// variant through the environment (CC, CXX plus the variant's extra_env).
struct PackageSpec {
    std::string name;
    std::string version;
    std::filesystem::path source_path;
    std::string build_cmd;
    std::optional<std::string> test_cmd;
    std::vector<std::string> artifact_globs;
    long long loc = 0;
    Reproducibility reproducible = Reproducibility::unknown;

    bool operator==(const PackageSpec&) const = default;
};

struct CorpusManifest {
    std::vector<PackageSpec> packages;
    long long min_loc = 0;
    std::string created_at;

    bool operator==(const CorpusManifest&) const = default;

    const PackageSpec* find(const std::string& name) const;
};

// Parses and validates a manifest file. Unknown fields are rejected so typos
// surface immediately. Entries without an explicit `loc` get one computed
// from their source tree.
CorpusManifest load_manifest(const std::filesystem::path& path);

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

// Throws ValidationError naming the offending entry on duplicate names,
// empty names, empty artifact_globs or negative loc.
void validate_manifest(const CorpusManifest& manifest);

// Non-blank, non-comment-only lines across C/C++ source and header files
// (.c .h .cc .cpp .cxx .hh .hpp). Line and block comments are stripped with a
// minimal scanner; there is no preprocessor awareness.
long long count_loc(const std::filesystem::path& source_path);

// Keeps packages with loc >= min_loc (and reproducible == verified when
// required), preserving order. The input is untouched.
CorpusManifest filter_corpus(const CorpusManifest& manifest, long long min_loc,
                             bool require_reproducible);

}  // namespace impact
