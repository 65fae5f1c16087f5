#include <impact/errors.hpp>
#include <impact/pipeline.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::set<int> parse_stages(const std::string& spec) {
    std::set<int> stages;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            stages.insert(std::stoi(item));
        } catch (...) {
            throw impact::ConfigError("invalid --stages value: \"" + spec + "\"");
        }
    }
    if (stages.empty()) throw impact::ConfigError("empty --stages value");
    return stages;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Miscompilation impact pipeline: staged build, binary-diff and "
                 "test-divergence analysis over a package corpus"};
    app.require_subcommand(1);

    // corpus verify
    auto* corpus = app.add_subcommand("corpus", "Corpus maintenance");
    corpus->require_subcommand(1);
    auto* verify = corpus->add_subcommand(
        "verify", "Double-build every package and stamp reproducibility");
    std::string v_manifest, v_cc, v_cxx, v_output, v_workdir = "impact-verify-work";
    verify->add_option("--manifest", v_manifest, "Corpus manifest file")
        ->required()
        ->envname("IMPACT_MANIFEST");
    verify->add_option("--cc", v_cc, "C compiler to build with")->required();
    verify->add_option("--cxx", v_cxx, "C++ compiler (defaults to --cc)");
    verify->add_option("--output", v_output, "Where to write the stamped manifest "
                                             "(defaults to the input path)");
    verify->add_option("--work-dir", v_workdir, "Scratch directory for the builds");

    // run
    auto* run = app.add_subcommand("run", "Run the staged analysis for one bug");
    impact::RunConfig config;
    std::string r_stages = "1,2,3";
    std::string r_run_dir, r_bug, r_manifest;
    long long r_build_timeout = 1800, r_test_timeout = 1800;
    run->add_option("--run-dir", r_run_dir, "Record store directory")
        ->required()
        ->envname("IMPACT_RUN_DIR");
    run->add_option("--bug", r_bug, "Bug descriptor file")
        ->required()
        ->envname("IMPACT_BUG");
    run->add_option("--manifest", r_manifest, "Corpus manifest file")
        ->required()
        ->envname("IMPACT_MANIFEST");
    run->add_option("--stages", r_stages, "Comma-separated stage subset of 1,2,3")
        ->envname("IMPACT_STAGES");
    run->add_option("--parallelism", config.parallelism, "Worker pool width")
        ->envname("IMPACT_PARALLELISM");
    run->add_option("--rerun-count", config.rerun_count,
                    "Divergence confirmation reruns")
        ->envname("IMPACT_RERUN_COUNT");
    run->add_option("--seed", config.seed, "Worksheet sampling seed")
        ->envname("IMPACT_SEED");
    run->add_option("--sample-size", config.sample_size,
                    "Differing functions sampled per worksheet")
        ->envname("IMPACT_SAMPLE_SIZE");
    run->add_option("--build-timeout", r_build_timeout, "Per-package build timeout (s)")
        ->envname("IMPACT_BUILD_TIMEOUT");
    run->add_option("--test-timeout", r_test_timeout, "Per-suite test timeout (s)")
        ->envname("IMPACT_TEST_TIMEOUT");
    run->add_option("--disassembler-cmd", config.disassembler_cmd,
                    "Disassembler command template with {binary}")
        ->envname("IMPACT_DISASSEMBLER_CMD");
    run->add_option("--function-total", config.function_total,
                    "Corpus-wide function count for fraction rendering")
        ->envname("IMPACT_FUNCTION_TOTAL");
    run->add_flag("--dry-run", config.dry_run,
                  "Validate config, toolchain and witness without building");

    // report
    auto* report = app.add_subcommand("report", "Render impact tables from records");
    std::string p_run_dir, p_group = "bug", p_format = "markdown";
    long long p_function_total = 0;
    report->add_option("--run-dir", p_run_dir, "Record store directory")
        ->required()
        ->envname("IMPACT_RUN_DIR");
    report->add_option("--group-by", p_group, "bug | tool | severity")
        ->check(CLI::IsMember({"bug", "tool", "severity"}))
        ->envname("IMPACT_GROUP_BY");
    report->add_option("--format", p_format, "markdown | csv")
        ->check(CLI::IsMember({"markdown", "csv"}))
        ->envname("IMPACT_FORMAT");
    report->add_option("--function-total", p_function_total,
                       "Override the recorded function-count denominator");
    bool p_total_from_records = false;
    report->add_flag("--function-total-from-records", p_total_from_records,
                     "Derive the denominator from stage-2 records (lower bound; "
                     "identical pairs were never disassembled)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            auto result = impact::cmd_corpus_verify(
                v_manifest, v_cc, v_cxx.empty() ? v_cc : v_cxx, v_workdir,
                v_output.empty() ? v_manifest : v_output);
            std::cout << "verified=" << result.verified.size()
                      << " failed=" << result.failed.size()
                      << " errors=" << result.errored.size() << "\n";
            return result.errored.empty() ? 0 : 1;
        }
        if (run->parsed()) {
            config.run_dir = r_run_dir;
            config.bug_file = r_bug;
            config.manifest_file = r_manifest;
            config.stages = parse_stages(r_stages);
            config.build_timeout = std::chrono::seconds(r_build_timeout);
            config.test_timeout = std::chrono::seconds(r_test_timeout);
            impact::RunSummary summary = impact::cmd_run(config);
            std::cout << impact::render_summary(summary);
            return 0;
        }
        if (report->parsed()) {
            impact::GroupKey key = p_group == "tool"
                                       ? impact::GroupKey::tool
                                       : p_group == "severity" ? impact::GroupKey::severity
                                                               : impact::GroupKey::bug;
            impact::TableFormat format = p_format == "csv" ? impact::TableFormat::csv
                                                           : impact::TableFormat::markdown;
            std::optional<long long> total;
            if (p_function_total > 0) total = p_function_total;
            if (p_total_from_records) {
                total = impact::function_total_from_records(p_run_dir);
                if (!total)
                    std::cerr << "warning: no stage-2 function totals recorded; "
                                 "using the configured denominator\n";
            }
            std::cout << impact::cmd_report(p_run_dir, key, format, total);
            return 0;
        }
    } catch (const impact::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const impact::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const impact::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
