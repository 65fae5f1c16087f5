#include <impact/builder.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>
#include <impact/sha256.hpp>
#include <impact/subprocess.hpp>

#include <atomic>

#include <unistd.h>

namespace fs = std::filesystem;

namespace impact {

std::string to_string(BuildStatus s) {
    switch (s) {
        case BuildStatus::ok: return "ok";
        case BuildStatus::build_failed: return "build_failed";
        case BuildStatus::timeout: return "timeout";
    }
    return "build_failed";
}

BuildStatus build_status_from_string(const std::string& s) {
    if (s == "ok") return BuildStatus::ok;
    if (s == "build_failed") return BuildStatus::build_failed;
    if (s == "timeout") return BuildStatus::timeout;
    throw ParseError("invalid build status: \"" + s + "\"");
}

namespace {

std::atomic<uint64_t> g_job_counter{0};

// Claims a fresh job directory. create_directory fails if the path already
// exists, so two jobs can never share one; an owner token detects a foreign
// writer after the fact.
fs::path claim_workdir(const BuildOptions& options, const std::string& job_name) {
    fs::create_directories(options.work_root);
    uint64_t uniq = g_job_counter.fetch_add(1);
    fs::path dir = options.work_root /
                   (job_name + "-" + std::to_string(getpid()) + "-" + std::to_string(uniq));
    if (!fs::create_directory(dir))
        throw IoError("workdir collision: " + dir.string());
    return dir;
}

std::string owner_token(const std::string& job_name) {
    return "impact-job " + job_name + " pid " + std::to_string(getpid()) + "\n";
}

}  // namespace

MarkerCounts extract_markers(const fs::path& log_path, const BugDescriptor& bug) {
    return count_markers(read_file(log_path), bug);
}

BuildOutcome build_package(const PackageSpec& pkg, const CompilerVariant& variant,
                           const BuildOptions& options) {
    std::string job = options.job_name.empty() ? pkg.name + "-" + variant.variant_id
                                               : options.job_name;
    fs::path workdir = claim_workdir(options, job);
    fs::path token_path = workdir / ".impact-owner";
    write_file_atomic(token_path, owner_token(job));

    BuildOutcome outcome;
    outcome.package = pkg.name;
    outcome.variant_id = variant.variant_id;
    outcome.log_path = workdir / "build.log";
    outcome.build_dir = workdir / "tree";

    copy_tree(pkg.source_path, outcome.build_dir);

    CommandSpec cmd;
    cmd.shell_command = pkg.build_cmd;
    cmd.working_dir = outcome.build_dir;
    cmd.env = variant.extra_env;
    // Absolute so build systems can invoke them from any subdirectory.
    cmd.env["CC"] = fs::absolute(variant.c_compiler_path).string();
    cmd.env["CXX"] = fs::absolute(variant.cxx_compiler_path).string();
    cmd.stdout_path = outcome.log_path;
    cmd.timeout = std::chrono::duration_cast<std::chrono::milliseconds>(options.timeout);

    CommandResult result = run_command(cmd);
    outcome.wall_seconds = result.wall_seconds;

    if (options.bug && fs::exists(outcome.log_path)) {
        MarkerCounts counts = extract_markers(outcome.log_path, *options.bug);
        outcome.reached_count = counts.reached;
        outcome.triggered_count = counts.triggered;
    }

    if (read_file(token_path) != owner_token(job))
        throw IoError("workdir ownership violated: " + workdir.string());

    if (result.timed_out) {
        outcome.status = BuildStatus::timeout;
        outcome.failure_reason = "timeout";
        return outcome;
    }
    if (result.exit_code != 0) {
        outcome.status = BuildStatus::build_failed;
        outcome.failure_reason = "exit-status " + std::to_string(result.exit_code);
        return outcome;
    }

    auto matches = glob_collect(outcome.build_dir, pkg.artifact_globs);
    if (matches.empty()) {
        outcome.status = BuildStatus::build_failed;
        outcome.failure_reason = "missing-artifacts: no file matched artifact_globs";
        return outcome;
    }
    for (const auto& rel : matches) {
        ArtifactRecord rec;
        rec.rel_path = rel.generic_string();
        rec.size = fs::file_size(outcome.build_dir / rel);
        rec.digest = sha256_file_hex(outcome.build_dir / rel);
        outcome.artifacts.push_back(std::move(rec));
    }
    outcome.status = BuildStatus::ok;
    return outcome;
}

ReproVerdict check_reproducibility(PackageSpec& pkg, const CompilerVariant& variant,
                                   const BuildOptions& options) {
    ReproVerdict verdict;
    BuildOptions opts = options;

    opts.job_name = pkg.name + "-repro1";
    BuildOutcome first = build_package(pkg, variant, opts);
    opts.job_name = pkg.name + "-repro2";
    BuildOutcome second = build_package(pkg, variant, opts);

    if (!first.ok() || !second.ok()) {
        const BuildOutcome& bad = !first.ok() ? first : second;
        verdict.error = "build-error: " + bad.failure_reason;
        pkg.reproducible = Reproducibility::failed;
        return verdict;
    }

    std::map<std::string, std::string> digests_a, digests_b;
    for (const auto& a : first.artifacts) digests_a[a.rel_path] = a.digest;
    for (const auto& b : second.artifacts) digests_b[b.rel_path] = b.digest;

    for (const auto& [path, digest] : digests_a) {
        auto it = digests_b.find(path);
        if (it == digests_b.end() || it->second != digest)
            verdict.differing_paths.push_back(path);
    }
    for (const auto& [path, digest] : digests_b) {
        if (!digests_a.count(path)) verdict.differing_paths.push_back(path);
    }

    verdict.verified = verdict.differing_paths.empty();
    pkg.reproducible = verdict.verified ? Reproducibility::verified : Reproducibility::failed;
    return verdict;
}

}  // namespace impact
