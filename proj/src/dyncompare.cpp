#include <impact/dyncompare.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>
#include <impact/subprocess.hpp>

#include <algorithm>
#include <atomic>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;

namespace impact {

std::string to_string(TestStatus s) {
    switch (s) {
        case TestStatus::completed: return "completed";
        case TestStatus::infra_failure: return "infra_failure";
        case TestStatus::timeout: return "timeout";
    }
    return "infra_failure";
}

std::string to_string(TestResult r) {
    switch (r) {
        case TestResult::pass: return "pass";
        case TestResult::fail: return "fail";
        case TestResult::skip: return "skip";
    }
    return "fail";
}

TestStatus test_status_from_string(const std::string& s) {
    if (s == "completed") return TestStatus::completed;
    if (s == "infra_failure") return TestStatus::infra_failure;
    if (s == "timeout") return TestStatus::timeout;
    throw ParseError("invalid test status: \"" + s + "\"");
}

TestResult test_result_from_string(const std::string& s) {
    if (s == "pass") return TestResult::pass;
    if (s == "fail") return TestResult::fail;
    if (s == "skip") return TestResult::skip;
    throw ParseError("invalid test result: \"" + s + "\"");
}

std::string to_string(Divergence d) {
    switch (d) {
        case Divergence::identical: return "identical";
        case Divergence::divergent: return "divergent";
        case Divergence::infra_failure: return "infra_failure";
        case Divergence::not_run: return "not_run";
    }
    return "not_run";
}

Divergence divergence_from_string(const std::string& s) {
    if (s == "identical") return Divergence::identical;
    if (s == "divergent") return Divergence::divergent;
    if (s == "infra_failure") return Divergence::infra_failure;
    if (s == "not_run") return Divergence::not_run;
    throw ParseError("invalid divergence classification: \"" + s + "\"");
}

bool parse_test_protocol(const std::string& stdout_text,
                         std::map<std::string, TestResult>& results,
                         std::string& error) {
    results.clear();
    auto lines = split_lines(stdout_text);
    size_t i = 0;
    while (i < lines.size() && lines[i] != "TESTPROTO 1") ++i;
    if (i == lines.size()) {
        error = "protocol header missing";
        return false;
    }
    ++i;
    for (; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string first, second, extra;
        ss >> first >> second;
        if (first == "END") {
            long long declared = -1;
            try {
                declared = std::stoll(second);
            } catch (...) {
                error = "malformed END line: \"" + line + "\"";
                return false;
            }
            if (declared != (long long)results.size()) {
                error = "END count " + std::to_string(declared) + " != " +
                        std::to_string(results.size()) + " test lines";
                return false;
            }
            return true;
        }
        if (second.empty() || (ss >> extra)) {
            error = "malformed test line: \"" + line + "\"";
            return false;
        }
        TestResult r;
        try {
            r = test_result_from_string(second);
        } catch (const ParseError&) {
            error = "malformed test line: \"" + line + "\"";
            return false;
        }
        if (!results.emplace(first, r).second) {
            error = "duplicate test id \"" + first + "\"";
            return false;
        }
    }
    error = "terminator END line missing";
    return false;
}

namespace {

std::atomic<uint64_t> g_test_counter{0};

}  // namespace

TestRun run_tests(const PackageSpec& pkg, const BuildOutcome& build,
                  const CompilerVariant& variant, const TestRunOptions& options) {
    if (!pkg.test_cmd)
        throw ConfigError("package \"" + pkg.name + "\" has no test_cmd");
    if (!build.ok())
        throw ConfigError("package \"" + pkg.name + "\" build is not ok");

    TestRun run;
    run.package = pkg.name;
    run.variant_id = build.variant_id;

    std::string job = options.job_name.empty()
                          ? pkg.name + "-test-" + build.variant_id
                          : options.job_name;
    fs::create_directories(options.work_root);
    fs::path dir = options.work_root /
                   (job + "-" + std::to_string(getpid()) + "-" +
                    std::to_string(g_test_counter.fetch_add(1)));
    if (!fs::create_directory(dir)) throw IoError("test workdir collision: " + dir.string());

    fs::path tree = dir / "tree";
    copy_tree(build.build_dir, tree);
    run.raw_log = dir / "test-stdout.log";

    CommandSpec cmd;
    cmd.shell_command = *pkg.test_cmd;
    cmd.working_dir = tree;
    cmd.env = variant.extra_env;
    cmd.env["CC"] = fs::absolute(variant.c_compiler_path).string();
    cmd.env["CXX"] = fs::absolute(variant.cxx_compiler_path).string();
    cmd.stdout_path = run.raw_log;
    cmd.stderr_path = dir / "test-stderr.log";
    cmd.timeout = std::chrono::duration_cast<std::chrono::milliseconds>(options.timeout);

    CommandResult result = run_command(cmd);
    if (result.timed_out) {
        run.status = TestStatus::timeout;
        run.infra_detail = "timeout";
        return run;
    }

    std::string protocol_error;
    std::map<std::string, TestResult> results;
    if (!parse_test_protocol(read_file(run.raw_log), results, protocol_error)) {
        run.status = TestStatus::infra_failure;
        run.infra_detail = protocol_error;
        return run;
    }
    run.status = TestStatus::completed;
    run.results = std::move(results);
    return run;
}

PreliminaryVerdict compare_runs(const TestRun& buggy, const TestRun& fixed) {
    PreliminaryVerdict verdict;
    if (buggy.status != TestStatus::completed || fixed.status != TestStatus::completed) {
        verdict.kind = PreliminaryVerdict::infra_failure;
        return verdict;
    }
    std::set<std::string> keys;
    for (const auto& [k, v] : buggy.results) keys.insert(k);
    for (const auto& [k, v] : fixed.results) keys.insert(k);
    for (const auto& k : keys) {
        auto a = buggy.results.find(k);
        auto b = fixed.results.find(k);
        bool same = a != buggy.results.end() && b != fixed.results.end() &&
                    a->second == b->second;
        if (!same) verdict.divergent_tests.push_back(k);
    }
    verdict.kind = verdict.divergent_tests.empty() ? PreliminaryVerdict::identical
                                                   : PreliminaryVerdict::divergent_candidate;
    return verdict;
}

DivergenceVerdict confirm_divergence(const PackageSpec& pkg,
                                     const BuildOutcome& buggy_build,
                                     const BuildOutcome& fixed_build,
                                     const CompilerVariant& buggy_variant,
                                     const CompilerVariant& fixed_variant,
                                     const PreliminaryVerdict& candidate,
                                     long long rerun_count,
                                     const TestRunOptions& options) {
    if (candidate.kind != PreliminaryVerdict::divergent_candidate)
        throw ConfigError("confirm_divergence requires a divergent candidate");
    if (rerun_count < 1) throw ConfigError("rerun_count must be >= 1");

    DivergenceVerdict verdict;
    verdict.reruns_performed = 1;  // the initial comparison that raised the candidate

    std::vector<std::vector<std::string>> observed_sets;
    observed_sets.push_back(candidate.divergent_tests);

    for (long long i = 0; i < rerun_count; ++i) {
        TestRun buggy = run_tests(pkg, buggy_build, buggy_variant, options);
        TestRun fixed = run_tests(pkg, fixed_build, fixed_variant, options);
        ++verdict.reruns_performed;
        PreliminaryVerdict rerun = compare_runs(buggy, fixed);
        if (rerun.kind == PreliminaryVerdict::infra_failure) {
            verdict.classification = Divergence::infra_failure;
            verdict.infra_detail = "infra failure during rerun " + std::to_string(i + 1);
            return verdict;
        }
        observed_sets.push_back(rerun.divergent_tests);
    }

    bool stable = std::all_of(observed_sets.begin(), observed_sets.end(),
                              [&](const auto& s) { return s == observed_sets.front(); });
    if (stable) {
        verdict.classification = Divergence::divergent;
        verdict.divergent_tests = candidate.divergent_tests;
        verdict.reproducible = true;
        return verdict;
    }

    // Tests seen in some divergent sets but not all are flaky.
    std::map<std::string, size_t> seen_in;
    for (const auto& s : observed_sets)
        for (const auto& t : s) ++seen_in[t];
    for (const auto& [t, n] : seen_in)
        if (n < observed_sets.size()) verdict.flaky_tests.push_back(t);

    verdict.classification = Divergence::identical;
    verdict.reproducible = false;
    return verdict;
}

namespace {

// Plain LCS opcode diff, rendered unified-style (' ', '-', '+'). Function
// bodies are small; quadratic is fine at this scale.
std::vector<std::string> opcode_diff_lines(const std::vector<std::string>& a,
                                           const std::vector<std::string>& b) {
    size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = n; i-- > 0;)
        for (size_t j = m; j-- > 0;)
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                                     : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    std::vector<std::string> out;
    size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j]) {
            out.push_back("  " + a[i]);
            ++i, ++j;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            out.push_back("- " + a[i++]);
        } else {
            out.push_back("+ " + b[j++]);
        }
    }
    while (i < n) out.push_back("- " + a[i++]);
    while (j < m) out.push_back("+ " + b[j++]);
    return out;
}

std::vector<std::string> raw_excerpt(const FunctionBody& body, size_t limit = 64) {
    std::vector<std::string> out;
    for (const auto& insn : body.instructions) {
        if (out.size() >= limit) {
            out.push_back("... (" + std::to_string(body.instructions.size() - limit) +
                          " more)");
            break;
        }
        out.push_back(insn.address + ": " + insn.opcode +
                      (insn.operands.empty() ? "" : " " + insn.operands));
    }
    return out;
}

}  // namespace

InspectionWorksheet emit_worksheet(const BinaryDiffReport& report,
                                   const std::map<std::string, FunctionBody>& funcs_a,
                                   const std::map<std::string, FunctionBody>& funcs_b,
                                   long long sample_size, long long seed,
                                   const std::string& bug_id, const std::string& package) {
    if (report.differing.empty())
        throw ConfigError("worksheet requires a nonempty differing set");

    InspectionWorksheet sheet;
    sheet.bug_id = bug_id;
    sheet.package = package;
    sheet.seed = seed;
    sheet.sample_size = sample_size;

    std::vector<std::string> names = report.differing;
    std::sort(names.begin(), names.end());
    size_t take = std::min<size_t>(size_t(std::max<long long>(sample_size, 0)), names.size());

    // Partial Fisher-Yates with raw engine outputs; std::uniform_int_distribution
    // is implementation-defined, which would break cross-platform determinism.
    std::mt19937_64 rng{uint64_t(seed)};
    for (size_t i = 0; i < take; ++i) {
        size_t j = i + size_t(rng() % (names.size() - i));
        std::swap(names[i], names[j]);
    }
    names.resize(take);
    std::sort(names.begin(), names.end());

    for (const auto& name : names) {
        WorksheetFunction wf;
        wf.name = name;
        auto a = funcs_a.find(name);
        auto b = funcs_b.find(name);
        if (a != funcs_a.end() && b != funcs_b.end()) {
            wf.opcode_diff = opcode_diff_lines(normalize(a->second), normalize(b->second));
            wf.raw_a = raw_excerpt(a->second);
            wf.raw_b = raw_excerpt(b->second);
        }
        sheet.sampled_functions.push_back(std::move(wf));
    }
    return sheet;
}

std::string render_worksheet_markdown(const InspectionWorksheet& sheet) {
    std::ostringstream out;
    out << "# Inspection worksheet: bug " << sheet.bug_id << ", package "
        << sheet.package << "\n\n";
    out << "Sampled " << sheet.sampled_functions.size() << " differing function(s)"
        << " (sample_size=" << sheet.sample_size << ", seed=" << sheet.seed << ").\n\n";
    out << "Impact rating (fill in): none | very_low | low | medium | high\n\n";
    out << "rating: " << (sheet.impact_rating ? *sheet.impact_rating : "") << "\n";
    out << "verdict: " << sheet.verdict_field << "\n";
    for (const auto& wf : sheet.sampled_functions) {
        out << "\n## " << wf.name << "\n\n";
        out << "Opcode diff (buggy vs fixed):\n\n```\n";
        for (const auto& line : wf.opcode_diff) out << line << "\n";
        out << "```\n\nRaw instructions, buggy side:\n\n```\n";
        for (const auto& line : wf.raw_a) out << line << "\n";
        out << "```\n\nRaw instructions, fixed side:\n\n```\n";
        for (const auto& line : wf.raw_b) out << line << "\n";
        out << "```\n";
    }
    return out.str();
}

}  // namespace impact
