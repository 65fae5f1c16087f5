// Acceptance suite. Each criterion (A1..A9) runs standalone and prints one
// PASS/FAIL line; run with no arguments for all criteria or name the ones to
// run. Exit code is nonzero iff an executed criterion failed.

#include <impact/asmdiff.hpp>
#include <impact/builder.hpp>
#include <impact/corpus.hpp>
#include <impact/dyncompare.hpp>
#include <impact/fsutil.hpp>
#include <impact/pipeline.hpp>
#include <impact/records.hpp>
#include <impact/report.hpp>
#include <impact/subprocess.hpp>

#include <json.hpp>

#include "study_dataset.hpp"
#include "synthgen.hpp"
#include "testutil.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace impact;
using testutil::TempDir;

namespace {

struct Criterion {
    std::string name;
    long long checks = 0;
    long long failures = 0;
    std::vector<std::string> messages;

    void expect(bool ok, const std::string& label) {
        ++checks;
        if (!ok) {
            ++failures;
            messages.push_back(label);
        }
    }
    template <typename T, typename U>
    void eq(const std::string& label, const T& actual, const U& expected) {
        ++checks;
        if (!(actual == T(expected))) {
            ++failures;
            std::ostringstream msg;
            msg << label << ": computed " << actual << ", pinned " << expected;
            messages.push_back(msg.str());
        }
    }
    void note(const std::string& text) { messages.push_back("note: " + text); }
};

const AggregateRow* find_group(const std::vector<AggregateRow>& aggs,
                               const std::string& group) {
    for (const auto& a : aggs)
        if (a.group == group) return &a;
    return nullptr;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- A1: table arithmetic reproduction -------------------------------------

void check_block(Criterion& c, const AggregateRow* agg, const std::string& tag,
                 long long builds, long long reached, long long triggered,
                 long long diff_pkgs, std::optional<long long> test_diffs,
                 const std::string& reached_pct, const std::string& triggered_pct,
                 const std::string& diff_pct) {
    if (!agg) {
        c.expect(false, tag + ": aggregate row missing");
        return;
    }
    c.eq(tag + " builds_ok", agg->builds_ok, builds);
    c.eq(tag + " reached", agg->reached_pkgs, reached);
    c.eq(tag + " triggered", agg->triggered_pkgs, triggered);
    c.eq(tag + " diff_pkgs", agg->diff_pkgs, diff_pkgs);
    if (test_diffs) {
        c.expect(agg->test_diffs.has_value(), tag + " test_diffs missing");
        if (agg->test_diffs) c.eq(tag + " test_diffs", *agg->test_diffs, *test_diffs);
    }
    c.eq(tag + " reached%", agg->reached_pct, reached_pct);
    c.eq(tag + " triggered%", agg->triggered_pct, triggered_pct);
    c.eq(tag + " diff%", agg->diff_pkgs_pct, diff_pct);
}

void criterion_a1(Criterion& c) {
    auto start = std::chrono::steady_clock::now();
    auto rows = study::fuzzer_rows();
    auto by_tool = aggregate(rows, GroupKey::tool);
    auto all = aggregate(rows, GroupKey::all);

    check_block(c, find_group(by_tool, "csmith"), "csmith", 3062, 2482, 1043, 318, 0,
                "81%", "34%", "10%");
    check_block(c, find_group(by_tool, "emi"), "emi", 3076, 2424, 948, 151, 1,
                "79%", "31%", "5%");
    check_block(c, find_group(by_tool, "orange"), "orange", 1535, 293, 35, 8, 0,
                "19%", "2%", "1%");
    check_block(c, find_group(by_tool, "yarpgen"), "yarpgen", 615, 608, 257, 0,
                std::nullopt, "99%", "42%", "0%");
    check_block(c, all.empty() ? nullptr : &all[0], "all", 8284, 5804, 2283, 477, 1,
                "70%", "28%", "6%");
    if (c.failures > 0)
        c.note("the pinned emi builds/reached values (3076/2424) cannot coexist with "
               "the pinned all-row values (8284/5804): no per-bug row set sums to both "
               "(3062+3076+1535+615 = 8288 != 8284). The dataset's own rows sum to "
               "3072/2421, which every other pinned total is consistent with.");
    double elapsed = seconds_since(start);
    c.expect(elapsed < 1.0, "runtime " + std::to_string(elapsed) + "s >= 1s");
}

// --- A2: severity roll-up ---------------------------------------------------

void criterion_a2(Criterion& c) {
    auto rows = study::impact_rows();
    auto by_severity = aggregate(rows, GroupKey::severity);

    const AggregateRow* enh = find_group(by_severity, "enhancement");
    check_block(c, enh, "enhancement", 2449, 2054, 968, 84, std::nullopt,
                "84%", "40%", "3%");
    const AggregateRow* normal = find_group(by_severity, "normal");
    check_block(c, normal, "normal", 10151, 5608, 1941, 611, 2, "55%", "19%", "6%");
    const AggregateRow* blocker = find_group(by_severity, "release_blocker");
    if (blocker) {
        c.eq("release_blocker builds_ok", blocker->builds_ok, 1226);
        c.eq("release_blocker reached", blocker->reached_pkgs, 1191);
        c.eq("release_blocker triggered", blocker->triggered_pkgs, 294);
        c.eq("release_blocker diff_pkgs", blocker->diff_pkgs, 10);
        c.eq("release_blocker reached%", blocker->reached_pct, "97%");
        c.eq("release_blocker triggered%", blocker->triggered_pct, "24%");
        // 10/1226 rendered per the display rule (whole percent, half away
        // from zero), not the hand-formatted one-decimal variant.
        c.eq("release_blocker diff% (display rule)", blocker->diff_pkgs_pct,
             render_percent(10, 1226));
        c.eq("release_blocker diff% value", blocker->diff_pkgs_pct, "1%");
    } else {
        c.expect(false, "release_blocker aggregate row missing");
    }
}

// --- A3: function-fraction rendering ---------------------------------------

void criterion_a3(Criterion& c) {
    c.eq("4997/202000", function_fraction(4997, 202000), "2.5%");
    c.eq("52/202000", function_fraction(52, 202000), "<0.1%");
    c.eq("0/202000", function_fraction(0, 202000), "0%");
    c.eq("0/7", function_fraction(0, 7), "0%");
}

// --- A4: diff-engine oracle equivalence -------------------------------------

void criterion_a4(Criterion& c) {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng{0xA4A4A4A4ull};
    const int kPairs = 1000;
    long long agreements = 0;
    for (int i = 0; i < kPairs; ++i) {
        synthgen::SynthPair pair = synthgen::make_pair(rng);
        auto funcs_a = parse_functions(synthgen::render_disassembly(pair.a, rng));
        auto funcs_b = parse_functions(synthgen::render_disassembly(pair.b, rng));
        FunctionDiff produced = diff_functions(funcs_a, funcs_b);
        synthgen::OracleDiff oracle = synthgen::brute_force_diff(pair.a, pair.b);

        std::set<std::string> differing(produced.differing.begin(), produced.differing.end());
        std::set<std::string> added(produced.added.begin(), produced.added.end());
        std::set<std::string> removed(produced.removed.begin(), produced.removed.end());
        bool agree = differing == oracle.differing && added == oracle.added &&
                     removed == oracle.removed;
        if (agree) {
            ++agreements;
        } else if (c.failures < 5) {
            c.expect(false, "pair " + std::to_string(i) + ": production diff disagrees "
                            "with the brute-force comparator");
        }
        // generator self-check: the oracle matches the construction
        if (oracle.differing != pair.expect_differing ||
            oracle.added != pair.expect_added || oracle.removed != pair.expect_removed) {
            c.expect(false, "pair " + std::to_string(i) + ": oracle does not match the "
                            "generator's ground truth");
        }
    }
    c.eq("agreement", agreements, kPairs);
    double elapsed = seconds_since(start);
    c.expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s >= 30s");
}

// --- A5: operand invariance --------------------------------------------------

void criterion_a5(Criterion& c) {
    std::mt19937_64 rng{0xA5A5A5A5ull};
    long long bodies = 0;
    long long invariant_violations = 0;
    while (bodies < 10000) {
        synthgen::SynthBinary bin = synthgen::random_binary(rng);
        synthgen::SynthBinary rewritten = synthgen::rewrite_operands(bin, rng);
        auto funcs_a = parse_functions(synthgen::render_disassembly(bin, rng));
        auto funcs_b = parse_functions(synthgen::render_disassembly(rewritten, rng));
        FunctionDiff diff = diff_functions(funcs_a, funcs_b);
        invariant_violations += (long long)diff.differing.size();
        bodies += (long long)bin.size();
    }
    c.expect(bodies >= 10000, "generated only " + std::to_string(bodies) + " bodies");
    c.eq("operand rewrites contributing |differing|", invariant_violations, 0);
}

// --- A6: end-to-end shim pipeline --------------------------------------------

struct ShimCorpus {
    std::filesystem::path manifest_file;
    std::filesystem::path bug_file;

    // alpha carries the planted one-mnemonic change and test failure; the
    // other three build and test identically under every variant.
    ShimCorpus(const std::filesystem::path& root, const std::string& bug_id,
               bool emit_triggered) {
        namespace fs = std::filesystem;
        testutil::make_target_package(root / "src" / "alpha", "alpha");
        CorpusManifest manifest;
        manifest.packages.push_back(
            testutil::target_package_spec(root / "src" / "alpha", "alpha"));
        for (const std::string name : {"beta", "gamma", "delta"}) {
            testutil::make_quiet_package(root / "src" / name, name);
            manifest.packages.push_back(
                testutil::quiet_package_spec(root / "src" / name, name));
        }
        manifest_file = root / "manifest.json";
        save_manifest(manifest, manifest_file);

        auto fixed_cc = testutil::make_plain_cc(root, "cc-fixed");
        auto buggy_cc =
            testutil::make_patching_cc(root, "cc-buggy", "impl", "a & b", "a | b");
        auto wl_cc = testutil::make_marker_cc(root, "cc-wl", "IMPACT-REACHED:" + bug_id,
                                              "IMPACT-TRIGGERED:" + bug_id,
                                              emit_triggered ? "impl" : "");
        // The never-triggering variant models a miscrafted warning-laden
        // compiler; a witness would (correctly) refuse to let it run.
        std::string witness;
        if (emit_triggered) {
            testutil::write_file(root / "witness_impl.c",
                                 "int witness(int a, int b) { return a & b; }\n");
            witness = (root / "witness_impl.c").string();
        }
        bug_file = testutil::write_bug_file(root, bug_id, "precise", buggy_cc, fixed_cc,
                                            wl_cc, witness);
    }
};

void criterion_a6(Criterion& c) {
    auto start = std::chrono::steady_clock::now();
    TempDir tmp("a6");
    ShimCorpus corpus(tmp.path, "900001", /*emit_triggered=*/true);
    std::filesystem::path run_dir = tmp.path / "run";

    std::string cli = IMPACT_CLI_PATH;
    CommandSpec run_cmd;
    run_cmd.shell_command = cli + " run --run-dir " + shell_quote(run_dir.string()) +
                            " --bug " + shell_quote(corpus.bug_file.string()) +
                            " --manifest " + shell_quote(corpus.manifest_file.string()) +
                            " --stages 1,2,3 --parallelism 2 --rerun-count 3 --seed 7";
    std::string output;
    CommandResult result = run_command_capture(run_cmd, output);
    c.expect(result.ok(), "cmd_run exited with " + std::to_string(result.exit_code));

    auto summary = nlohmann::ordered_json::parse(
        read_file(run_dir / "900001" / "summary.json"));
    c.eq("variant builds ok", summary["variant_builds_ok"].get<long long>(), 12);
    c.eq("packages built", summary["builds_ok_pkgs"].get<long long>(), 4);
    c.eq("reached_pkgs", summary["reached_pkgs"].get<long long>(), 4);
    c.eq("triggered_pkgs", summary["triggered_pkgs"].get<long long>(), 1);
    c.eq("diff_pkgs", summary["diff_pkgs"].get<long long>(), 1);
    c.eq("diff_functions", summary["diff_functions"].get<long long>(), 1);
    c.eq("test_diffs", summary["test_diffs"].get<long long>(), 1);
    c.eq("anomalies (precise-bug consistency)", summary["anomalies"].get<long long>(), 0);

    // the per-bug table row agrees with the summary
    CommandSpec report_cmd;
    report_cmd.shell_command = cli + " report --run-dir " + shell_quote(run_dir.string()) +
                               " --group-by bug --format csv 2>/dev/null";
    std::string csv;
    c.expect(run_command_capture(report_cmd, csv).ok(), "report command failed");
    auto lines = split_lines(csv);
    c.eq("report rows", (long long)lines.size(), 2);
    if (lines.size() == 2)
        c.eq("report row", lines[1],
             std::string("900001,normal,4,4,1,precise,1,1,<0.1%,1,-"));

    std::string digest_before = tree_digest(run_dir);
    CommandResult rerun = run_command_capture(run_cmd, output);
    c.expect(rerun.ok(), "rerun exited with " + std::to_string(rerun.exit_code));
    std::string digest_after = tree_digest(run_dir);
    c.expect(digest_before == digest_after, "rerun is not byte-identical");

    double elapsed = seconds_since(start);
    c.expect(elapsed < 300.0, "runtime " + std::to_string(elapsed) + "s >= 5min");
}

// --- A7: stage gating and marker protocol ------------------------------------

void criterion_a7(Criterion& c) {
    TempDir tmp("a7");

    // marker protocol exactness: R reached, T <= R triggered
    for (auto [r, t] : std::vector<std::pair<int, int>>{{6, 4}, {3, 0}, {1, 1}, {12, 7}}) {
        BugDescriptor bug;
        bug.bug_id = "m";
        bug.reached_marker = "IMPACT-REACHED:m";
        bug.triggered_marker = "IMPACT-TRIGGERED:m";
        std::string log = "compiler banner\n";
        for (int i = 0; i < r; ++i) log += "IMPACT-REACHED:m unit" + std::to_string(i) + "\n";
        for (int i = 0; i < t; ++i) log += "IMPACT-TRIGGERED:m hit" + std::to_string(i) + "\n";
        testutil::write_file(tmp.path / "scan.log", log);
        MarkerCounts counts = extract_markers(tmp.path / "scan.log", bug);
        c.eq("reached R=" + std::to_string(r), counts.reached, r);
        c.eq("triggered T=" + std::to_string(t), counts.triggered, t);
    }

    // A precise bug whose warning-laden compiler never triggers, over a
    // package whose binaries nevertheless differ: inconsistency anomaly,
    // and no disassembly anywhere.
    ShimCorpus inconsistent(tmp.path / "inc", "900002", /*emit_triggered=*/false);
    RunConfig config;
    config.run_dir = tmp.path / "inc" / "run";
    config.bug_file = inconsistent.bug_file;
    config.manifest_file = inconsistent.manifest_file;
    config.stages = {1, 2, 3};
    RunSummary summary = cmd_run(config);
    c.eq("triggered_pkgs", summary.triggered_pkgs, 0);
    c.eq("diff_pkgs", summary.diff_pkgs, 1);
    c.expect(summary.anomalies >= 1, "no inconsistency anomaly raised");

    auto anomalies = load_anomalies(config.run_dir / "900002" / "alpha");
    bool found_hard_inconsistency = false;
    for (const auto& a : anomalies)
        if (a.kind == "inconsistency" && a.hard) found_hard_inconsistency = true;
    c.expect(found_hard_inconsistency, "missing hard inconsistency record for alpha");

    long long disasm_files = 0;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(config.run_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".disasm")
            ++disasm_files;
    }
    c.eq("disassembly caches under a never-triggered precise bug", disasm_files, 0);

    // stage 3 never runs for bitwise-identical pairs
    for (const std::string pkg : {"beta", "gamma", "delta"}) {
        c.expect(!std::filesystem::exists(config.run_dir / "900002" / pkg / "stage3"),
                 pkg + " has stage-3 records despite identical binaries");
    }
}

// --- A8: flaky-test policy ----------------------------------------------------

void criterion_a8(Criterion& c) {
    auto start = std::chrono::steady_clock::now();
    TempDir tmp("a8");

    // deterministic planted divergence: confirmed in 20/20 trials
    testutil::make_target_package(tmp.path / "src" / "alpha", "alpha");
    PackageSpec target = testutil::target_package_spec(tmp.path / "src" / "alpha", "alpha");
    auto fixed_cc = testutil::make_plain_cc(tmp.path, "cc-fixed");
    auto buggy_cc =
        testutil::make_patching_cc(tmp.path, "cc-buggy", "impl", "a & b", "a | b");
    auto fixed_variant = testutil::make_variant("fixed", VariantRole::fixed, fixed_cc);
    auto buggy_variant = testutil::make_variant("buggy", VariantRole::buggy, buggy_cc);

    BuildOptions boptions;
    boptions.work_root = tmp.path / "work";
    BuildOutcome fixed_build = build_package(target, fixed_variant, boptions);
    BuildOutcome buggy_build = build_package(target, buggy_variant, boptions);
    c.expect(fixed_build.ok() && buggy_build.ok(), "target builds failed");

    TestRunOptions toptions;
    toptions.work_root = tmp.path / "tests";
    int confirmed = 0;
    for (int trial = 0; trial < 20; ++trial) {
        TestRun buggy_run = run_tests(target, buggy_build, buggy_variant, toptions);
        TestRun fixed_run = run_tests(target, fixed_build, fixed_variant, toptions);
        PreliminaryVerdict prelim = compare_runs(buggy_run, fixed_run);
        if (prelim.kind != PreliminaryVerdict::divergent_candidate) continue;
        DivergenceVerdict verdict =
            confirm_divergence(target, buggy_build, fixed_build, buggy_variant,
                               fixed_variant, prelim, 3, toptions);
        if (verdict.classification == Divergence::divergent && verdict.reproducible)
            ++confirmed;
    }
    c.eq("deterministic divergence confirmed", confirmed, 20);

    // coin-flip test: candidate every trial, never confirmed
    testutil::make_quiet_package(tmp.path / "src" / "flaky", "flaky");
    testutil::write_script(tmp.path / "src" / "flaky" / "flaky.sh",
                           "c=$(cat \"$COUNTER_FILE\" 2>/dev/null || echo 0)\n"
                           "c=$((c+1))\n"
                           "echo \"$c\" > \"$COUNTER_FILE\"\n"
                           "echo 'TESTPROTO 1'\n"
                           "if [ $((c % 4)) -eq 1 ]; then echo 't_flaky fail'; "
                           "else echo 't_flaky pass'; fi\n"
                           "echo 'END 1'\n");
    PackageSpec flaky = testutil::quiet_package_spec(tmp.path / "src" / "flaky", "flaky");
    flaky.test_cmd = "COUNTER_FILE=" + (tmp.path / "counter").string() + " sh ./flaky.sh";
    BuildOutcome flaky_build = build_package(flaky, fixed_variant, boptions);
    c.expect(flaky_build.ok(), "flaky package build failed");

    int divergent_verdicts = 0;
    int candidates = 0;
    for (int trial = 0; trial < 20; ++trial) {
        TestRun buggy_run = run_tests(flaky, flaky_build, fixed_variant, toptions);
        TestRun fixed_run = run_tests(flaky, flaky_build, fixed_variant, toptions);
        PreliminaryVerdict prelim = compare_runs(buggy_run, fixed_run);
        if (prelim.kind != PreliminaryVerdict::divergent_candidate) continue;
        ++candidates;
        DivergenceVerdict verdict = confirm_divergence(flaky, flaky_build, flaky_build,
                                                       fixed_variant, fixed_variant,
                                                       prelim, 3, toptions);
        if (verdict.classification == Divergence::divergent) ++divergent_verdicts;
    }
    c.eq("flaky divergence candidates raised", candidates, 20);
    c.eq("flaky tests confirmed divergent", divergent_verdicts, 0);

    double elapsed = seconds_since(start);
    c.expect(elapsed < 120.0, "runtime " + std::to_string(elapsed) + "s >= 2min");
}

// --- A9: reproducibility checker ----------------------------------------------

void criterion_a9(Criterion& c) {
    TempDir tmp("a9");
    auto cc = testutil::make_plain_cc(tmp.path, "cc");
    auto variant = testutil::make_variant("v", VariantRole::fixed, cc);
    BuildOptions options;
    options.work_root = tmp.path / "work";

    // timestamp-embedding fixture is stamped failed with the artifact named
    testutil::write_file(tmp.path / "src" / "stamped" / "main.c",
                         "extern const char stamp[];\n"
                         "int main(void) { return stamp[0] ? 0 : 1; }\n");
    PackageSpec stamped;
    stamped.name = "stamped";
    stamped.source_path = tmp.path / "src" / "stamped";
    stamped.build_cmd =
        "printf 'const char stamp[] = \"%s\";\\n' \"$(date +%s%N)\" > stamp.c && "
        "\"$CC\" -O0 -o prog main.c stamp.c";
    stamped.artifact_globs = {"prog"};
    ReproVerdict stamped_verdict = check_reproducibility(stamped, variant, options);
    c.expect(!stamped_verdict.verified, "timestamp fixture verified unexpectedly");
    c.eq("stamped verdict", to_string(stamped.reproducible), "failed");
    c.eq("offending artifacts", (long long)stamped_verdict.differing_paths.size(), 1);
    if (!stamped_verdict.differing_paths.empty())
        c.eq("offending artifact name", stamped_verdict.differing_paths[0], "prog");

    // deterministic fixture is stamped verified
    testutil::make_quiet_package(tmp.path / "src" / "det", "det");
    PackageSpec det = testutil::quiet_package_spec(tmp.path / "src" / "det", "det");
    ReproVerdict det_verdict = check_reproducibility(det, variant, options);
    c.expect(det_verdict.verified, "deterministic fixture failed verification");
    c.eq("det verdict", to_string(det.reproducible), "verified");

    // embedded revision string is flagged; a scrubbed build is not
    testutil::write_file(tmp.path / "src" / "rev" / "main.c",
                         "const char revision[] = \"rev-258904\";\n"
                         "int main(void) { return revision[0] ? 0 : 1; }\n");
    PackageSpec rev;
    rev.name = "rev";
    rev.source_path = tmp.path / "src" / "rev";
    rev.build_cmd = "\"$CC\" -O0 -o prog main.c";
    rev.artifact_globs = {"prog"};
    BuildOutcome rev_build = build_package(rev, variant, options);
    c.expect(rev_build.ok(), "revision fixture build failed");
    c.expect(!assert_no_revision_marker(rev_build.build_dir / "prog", {"rev-258904"}),
             "embedded revision string not flagged");

    testutil::write_file(tmp.path / "src" / "scrubbed" / "main.c",
                         "const char revision[] = \"scrubbed\";\n"
                         "int main(void) { return revision[0] ? 0 : 1; }\n");
    PackageSpec scrubbed = rev;
    scrubbed.name = "scrubbed";
    scrubbed.source_path = tmp.path / "src" / "scrubbed";
    BuildOutcome scrubbed_build = build_package(scrubbed, variant, options);
    c.expect(scrubbed_build.ok(), "scrubbed fixture build failed");
    c.expect(assert_no_revision_marker(scrubbed_build.build_dir / "prog", {"rev-258904"}),
             "scrubbed binary falsely flagged");
}

}  // namespace

int main(int argc, char** argv) {
    std::map<std::string, std::function<void(Criterion&)>> criteria = {
        {"A1", criterion_a1}, {"A2", criterion_a2}, {"A3", criterion_a3},
        {"A4", criterion_a4}, {"A5", criterion_a5}, {"A6", criterion_a6},
        {"A7", criterion_a7}, {"A8", criterion_a8}, {"A9", criterion_a9},
    };

    std::vector<std::string> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(argv[i]);
    if (selected.empty())
        for (const auto& [name, fn] : criteria) selected.push_back(name);

    long long total_failures = 0;
    for (const auto& name : selected) {
        auto it = criteria.find(name);
        if (it == criteria.end()) {
            std::cerr << "unknown criterion: " << name << "\n";
            return 2;
        }
        Criterion c;
        c.name = name;
        try {
            it->second(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("unexpected exception: ") + e.what());
        }
        if (c.failures == 0) {
            std::cout << "[" << name << "] PASS (" << c.checks << " checks)\n";
        } else {
            std::cout << "[" << name << "] FAIL (" << c.failures << "/" << c.checks
                      << " checks failed)\n";
        }
        for (const auto& msg : c.messages) std::cout << "    " << msg << "\n";
        total_failures += c.failures;
    }
    return total_failures == 0 ? 0 : 1;
}
