#pragma once

#include <impact/corpus.hpp>
#include <impact/toolchain.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace impact {

enum class BuildStatus { ok, build_failed, timeout };

std::string to_string(BuildStatus s);
BuildStatus build_status_from_string(const std::string& s);

struct ArtifactRecord {
    std::string rel_path;  // relative to the build tree, matched an artifact glob
    uint64_t size = 0;
    std::string digest;    // sha256 hex of the file contents

    bool operator==(const ArtifactRecord&) const = default;
};

struct BuildOutcome {
    std::string package;
    std::string variant_id;
    BuildStatus status = BuildStatus::build_failed;
    std::string failure_reason;  // "exit-status N", "timeout", "missing-artifacts: ..."
    std::filesystem::path log_path;
    long long reached_count = 0;
    long long triggered_count = 0;
    std::vector<ArtifactRecord> artifacts;  // empty unless status == ok
    double wall_seconds = 0.0;
    std::filesystem::path build_dir;  // tree the build ran in; artifacts live here

    bool ok() const { return status == BuildStatus::ok; }
};

struct BuildOptions {
    // Fresh per-build directories are created under here; never shared
    // between jobs (creation fails on collision).
    std::filesystem::path work_root;
    std::chrono::seconds timeout{1800};
    // Marker context; counts stay 0 when null.
    const BugDescriptor* bug = nullptr;
    // Directory name for the build job; defaults to "<pkg>-<variant>".
    std::string job_name;
};

// Copies the package sources into a fresh directory, runs build_cmd under the
// variant's environment (CC/CXX + extra_env) with combined output captured to
// build.log, scans the log for the bug's markers and enumerates glob-matched
// artifacts with content digests. A zero exit with no glob matches is a
// build failure with a distinguishing reason.
BuildOutcome build_package(const PackageSpec& pkg, const CompilerVariant& variant,
                           const BuildOptions& options);

// Line-scan of a build log for the bug's markers.
MarkerCounts extract_markers(const std::filesystem::path& log_path,
                             const BugDescriptor& bug);

struct ReproVerdict {
    bool verified = false;
    std::vector<std::string> differing_paths;  // artifact rel paths that changed
    std::string error;  // build failure detail; verdict is failed when set
};

// Two independent builds in fresh directories; verified iff every artifact
// digest matches across them. Stamps pkg.reproducible.
ReproVerdict check_reproducibility(PackageSpec& pkg, const CompilerVariant& variant,
                                   const BuildOptions& options);

}  // namespace impact
