#pragma once

#include <impact/corpus.hpp>
#include <impact/records.hpp>
#include <impact/report.hpp>
#include <impact/toolchain.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace impact {

struct RunConfig {
    std::filesystem::path run_dir;
    std::filesystem::path bug_file;
    std::filesystem::path manifest_file;
    std::set<int> stages = {1, 2, 3};
    long long parallelism = 1;
    long long rerun_count = 3;
    long long seed = 0;
    long long sample_size = 10;
    long long function_total = 202000;
    std::chrono::seconds build_timeout{1800};
    std::chrono::seconds test_timeout{1800};
    std::string disassembler_cmd = "objdump -d {binary}";
    bool dry_run = false;
};

// Flags/paths sanity plus stage gating: stage 3 needs stage 2 selected or
// prior stage-2 records under run_dir, stage 2 likewise needs stage 1.
// Throws ConfigError.
void validate_config(const RunConfig& config);

struct RunSummary {
    std::string bug_id;
    long long packages_total = 0;
    long long variant_builds_ok = 0;  // individual successful variant builds
    long long builds_ok_pkgs = 0;     // packages with every required variant ok
    long long reached_pkgs = 0;
    long long triggered_pkgs = 0;
    long long diff_pkgs = 0;
    long long diff_functions = 0;
    long long test_diffs = 0;
    long long anomalies = 0;
    long long infra_failures = 0;
    long long package_errors = 0;
};

// Executes the selected stages over every manifest package with stage gating
// (stage 2 only for packages whose builds succeeded, stage 3 only for
// packages with non-identical artifacts), persisting records under run_dir.
// Existing records with a matching config digest are reused, so a rerun with
// identical config is byte-identical and cheap. Per-package failures are
// recorded and never abort the run.
RunSummary cmd_run(const RunConfig& config);

std::string render_summary(const RunSummary& summary);

struct CorpusVerifyResult {
    std::vector<std::string> verified;
    std::vector<std::string> failed;
    std::vector<std::string> errored;  // infrastructure errors, not verdicts
};

// Double-builds every package with the given compiler and stamps
// `reproducible` in the manifest written to output_path.
CorpusVerifyResult cmd_corpus_verify(const std::filesystem::path& manifest_path,
                                     const std::filesystem::path& cc_path,
                                     const std::filesystem::path& cxx_path,
                                     const std::filesystem::path& work_root,
                                     const std::filesystem::path& output_path);

// Loads all per-bug records under run_dir, builds rows, aggregates and
// renders. Throws ConfigError when run_dir holds no records.
std::string cmd_report(const std::filesystem::path& run_dir, GroupKey group_by,
                       TableFormat format,
                       std::optional<long long> function_total_override = std::nullopt);

// Best available function-count denominator from stage-2 records: the
// largest per-bug sum of buggy-side function totals. A lower bound, since
// bitwise-identical pairs are never disassembled and contribute nothing.
std::optional<long long> function_total_from_records(const std::filesystem::path& run_dir);

// Row assembly is exposed for tests and for the report command.
std::vector<PackageImpactRecord> load_package_records(
    const std::filesystem::path& bug_dir, const RunMetadata& meta);

}  // namespace impact
