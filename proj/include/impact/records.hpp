#pragma once

#include <impact/asmdiff.hpp>
#include <impact/builder.hpp>
#include <impact/dyncompare.hpp>
#include <impact/report.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace impact {

// Record store layout, one directory tree per run:
//
//   <run_dir>/<bug>/run.json                      run metadata + config digest
//   <run_dir>/<bug>/<pkg>/<variant>/build.log     raw combined build output
//   <run_dir>/<bug>/<pkg>/<variant>/outcome.json
//   <run_dir>/<bug>/<pkg>/<variant>/tree/...      the build tree (artifacts)
//   <run_dir>/<bug>/<pkg>/stage2/reports.json
//   <run_dir>/<bug>/<pkg>/stage3/verdict.json
//   <run_dir>/<bug>/<pkg>/stage3/worksheet.md / worksheet.json
//   <run_dir>/<bug>/<pkg>/anomalies.json
//   <run_dir>/<bug>/summary.json
//
// Documents are JSON with stable key order; paths inside records are relative
// to the package directory so a rerun writes byte-identical trees.

struct AnomalyRecord {
    std::string kind;  // "inconsistency", "structural", "marker-protocol"
    std::string detail;
    bool hard = false;
};

void save_outcome(const BuildOutcome& outcome, const std::filesystem::path& pkg_dir,
                  const std::string& variant_dir_name);
std::optional<BuildOutcome> load_outcome(const std::filesystem::path& pkg_dir,
                                         const std::string& variant_dir_name);

void save_stage2(const ArtifactSetDiff& diff, const std::filesystem::path& pkg_dir);
std::optional<ArtifactSetDiff> load_stage2(const std::filesystem::path& pkg_dir);

void save_stage3(const DivergenceVerdict& verdict, const std::filesystem::path& pkg_dir);
std::optional<DivergenceVerdict> load_stage3(const std::filesystem::path& pkg_dir);

void save_worksheet(const InspectionWorksheet& sheet, const std::filesystem::path& pkg_dir);
std::optional<InspectionWorksheet> load_worksheet(const std::filesystem::path& pkg_dir);

void save_anomalies(const std::vector<AnomalyRecord>& anomalies,
                    const std::filesystem::path& pkg_dir);
std::vector<AnomalyRecord> load_anomalies(const std::filesystem::path& pkg_dir);

struct RunMetadata {
    std::string bug_id;
    ToolFamily tool_family = ToolFamily::user;
    Severity severity = Severity::normal;
    Precision precision = Precision::over_approximating;
    std::vector<int> stages;
    std::vector<std::string> required_variants;
    long long rerun_count = 3;
    long long seed = 0;
    long long sample_size = 10;
    long long function_total = 202000;
    std::string disassembler_cmd;
    std::string config_digest;
};

void save_run_metadata(const RunMetadata& meta, const std::filesystem::path& bug_dir);
std::optional<RunMetadata> load_run_metadata(const std::filesystem::path& bug_dir);

}  // namespace impact
