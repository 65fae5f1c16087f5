#pragma once

#include <impact/asmdiff.hpp>
#include <impact/builder.hpp>
#include <impact/corpus.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace impact {

enum class TestStatus { completed, infra_failure, timeout };
enum class TestResult { pass, fail, skip };

std::string to_string(TestStatus s);
std::string to_string(TestResult r);
TestStatus test_status_from_string(const std::string& s);
TestResult test_result_from_string(const std::string& s);

struct TestRun {
    std::string package;
    std::string variant_id;
    TestStatus status = TestStatus::infra_failure;
    std::string infra_detail;  // why the protocol could not be consumed
    std::map<std::string, TestResult> results;  // empty unless completed
    std::filesystem::path raw_log;
};

struct TestRunOptions {
    std::filesystem::path work_root;
    std::chrono::seconds timeout{1800};
    std::string job_name;  // defaults to "<pkg>-test-<variant>"
};

// Copies the built tree into a fresh directory and runs test_cmd there with
// the variant's environment. Per-test results come from the line protocol on
// standard output ("TESTPROTO 1", "<id> <pass|fail|skip>"..., "END <count>");
// any deviation is an infrastructure failure, never a test failure.
TestRun run_tests(const PackageSpec& pkg, const BuildOutcome& build,
                  const CompilerVariant& variant, const TestRunOptions& options);

// Exposed for direct testing of the protocol rules.
bool parse_test_protocol(const std::string& stdout_text,
                         std::map<std::string, TestResult>& results,
                         std::string& error);

enum class Divergence { identical, divergent, infra_failure, not_run };

std::string to_string(Divergence d);
Divergence divergence_from_string(const std::string& s);

struct PreliminaryVerdict {
    enum Kind { identical, divergent_candidate, infra_failure } kind = infra_failure;
    // Tests present on one side only or with differing results.
    std::vector<std::string> divergent_tests;
};

PreliminaryVerdict compare_runs(const TestRun& buggy, const TestRun& fixed);

struct DivergenceVerdict {
    Divergence classification = Divergence::not_run;
    std::vector<std::string> divergent_tests;
    // Dual (buggy, fixed) suite executions that informed the verdict,
    // the initial comparison included.
    long long reruns_performed = 0;
    bool reproducible = false;
    std::vector<std::string> flaky_tests;  // divergents that failed to reproduce
    std::string infra_detail;
};

// Reruns both suites `rerun_count` times in fresh environments. Divergent
// only when every rerun reproduces exactly the candidate's divergent test
// set; anything less is classified identical with the unstable tests listed.
DivergenceVerdict confirm_divergence(const PackageSpec& pkg,
                                     const BuildOutcome& buggy_build,
                                     const BuildOutcome& fixed_build,
                                     const CompilerVariant& buggy_variant,
                                     const CompilerVariant& fixed_variant,
                                     const PreliminaryVerdict& candidate,
                                     long long rerun_count,
                                     const TestRunOptions& options);

struct WorksheetFunction {
    std::string name;
    std::vector<std::string> opcode_diff;  // aligned normalized-opcode hunks
    std::vector<std::string> raw_a;        // raw instruction excerpt, side A
    std::vector<std::string> raw_b;
};

struct InspectionWorksheet {
    std::string bug_id;
    std::string package;
    long long seed = 0;
    long long sample_size = 0;
    std::vector<WorksheetFunction> sampled_functions;
    std::string verdict_field;  // free text, left for the human inspector
    std::optional<std::string> impact_rating;  // none|very_low|low|medium|high
};

// Deterministically samples min(sample_size, |differing|) functions from the
// report and renders aligned opcode hunks plus raw excerpts from both sides.
InspectionWorksheet emit_worksheet(const BinaryDiffReport& report,
                                   const std::map<std::string, FunctionBody>& funcs_a,
                                   const std::map<std::string, FunctionBody>& funcs_b,
                                   long long sample_size, long long seed,
                                   const std::string& bug_id, const std::string& package);

std::string render_worksheet_markdown(const InspectionWorksheet& sheet);

}  // namespace impact
