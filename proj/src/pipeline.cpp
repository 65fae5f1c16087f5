#include <impact/pipeline.hpp>

#include <impact/asmdiff.hpp>
#include <impact/builder.hpp>
#include <impact/dyncompare.hpp>
#include <impact/errors.hpp>
#include <impact/fsutil.hpp>
#include <impact/sha256.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace impact {

namespace {

std::vector<std::string> required_variants_for(const std::set<int>& stages) {
    std::vector<std::string> out;
    if (stages.count(1)) out.push_back("warning_laden");
    if (stages.count(2) || stages.count(3)) {
        out.push_back("buggy");
        out.push_back("fixed");
    }
    return out;
}

std::string config_digest(const RunConfig& config, const BugDescriptor& bug) {
    // Only parameters that change record content participate; stages are
    // excluded so a run_dir can be grown stage by stage, and timeouts and
    // parallelism are operational knobs.
    Sha256 h;
    h.update("v1\n");
    h.update(bug.bug_id + "\n");
    h.update(bug.reached_marker + "\n" + bug.triggered_marker + "\n");
    for (const auto* v : {&bug.buggy, &bug.fixed, &bug.warning_laden}) {
        h.update(v->variant_id + "\n");
        h.update(v->c_compiler_path.string() + "\n" + v->cxx_compiler_path.string() + "\n");
    }
    h.update("rerun=" + std::to_string(config.rerun_count) + "\n");
    h.update("seed=" + std::to_string(config.seed) + "\n");
    h.update("sample=" + std::to_string(config.sample_size) + "\n");
    h.update("fntotal=" + std::to_string(config.function_total) + "\n");
    h.update("disasm=" + config.disassembler_cmd + "\n");
    return h.hex_digest();
}

bool any_package_has(const fs::path& bug_dir, const std::string& rel) {
    if (!fs::exists(bug_dir)) return false;
    for (const auto& entry : fs::directory_iterator(bug_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / rel)) return true;
    }
    return false;
}

struct PackageRunState {
    PackageImpactRecord record;
    std::vector<AnomalyRecord> anomalies;
    long long variant_builds_ok = 0;
    bool infra_failure = false;
    bool errored = false;
    std::string error_detail;
    std::string progress_line;
};

VariantRole role_from_name(const std::string& name) { return variant_role_from_string(name); }

BuildOutcome obtain_build(const fs::path& pkg_dir, const std::string& role_name,
                          const PackageSpec& pkg, const CompilerVariant& variant,
                          const RunConfig& config, const BugDescriptor& bug) {
    if (auto existing = load_outcome(pkg_dir, role_name)) return *existing;

    BuildOptions options;
    options.work_root = pkg_dir / ".work";
    options.timeout = config.build_timeout;
    options.bug = &bug;
    options.job_name = pkg.name + "-" + role_name;
    BuildOutcome outcome = build_package(pkg, variant, options);

    // Relocate the unique job directory to its record-store home so later
    // stages and reruns find the tree at a stable path. A leftover home
    // without outcome.json is a torn earlier attempt.
    fs::path job_dir = outcome.log_path.parent_path();
    fs::path home = pkg_dir / role_name;
    std::error_code ec;
    fs::remove_all(home, ec);
    fs::rename(job_dir, home);
    fs::remove(options.work_root, ec);  // rmdir; fails harmlessly unless empty
    outcome.log_path = home / "build.log";
    outcome.build_dir = home / "tree";

    save_outcome(outcome, pkg_dir, role_name);
    return outcome;
}

// The worksheet samples from the report with the most differing functions
// (ties broken by artifact path) - packages usually ship one monolithic
// binary, so this is almost always the only candidate.
const BinaryDiffReport* worksheet_candidate(const ArtifactSetDiff& diff) {
    const BinaryDiffReport* best = nullptr;
    for (const auto& r : diff.reports) {
        if (r.differing.empty()) continue;
        if (!best || r.differing.size() > best->differing.size() ||
            (r.differing.size() == best->differing.size() && r.rel_path < best->rel_path))
            best = &r;
    }
    return best;
}

PackageRunState run_package(const PackageSpec& pkg, const BugDescriptor& bug,
                            const RunConfig& config, const fs::path& bug_dir) {
    PackageRunState state;
    state.record.bug_id = bug.bug_id;
    state.record.package = pkg.name;

    fs::path pkg_dir = bug_dir / pkg.name;
    fs::create_directories(pkg_dir);

    auto required = required_variants_for(config.stages);
    std::map<std::string, BuildOutcome> outcomes;
    bool all_ok = true;
    for (const auto& role_name : required) {
        const CompilerVariant& variant = bug.variant(role_from_name(role_name));
        BuildOutcome outcome = obtain_build(pkg_dir, role_name, pkg, variant, config, bug);
        state.variant_builds_ok += outcome.ok() ? 1 : 0;
        all_ok = all_ok && outcome.ok();
        outcomes.emplace(role_name, std::move(outcome));
    }
    state.record.builds_ok = all_ok;

    if (auto it = outcomes.find("warning_laden"); it != outcomes.end()) {
        state.record.reached = it->second.reached_count;
        state.record.triggered = it->second.triggered_count;
        if (it->second.triggered_count > it->second.reached_count)
            state.anomalies.push_back(
                {"marker-protocol",
                 "triggered_count " + std::to_string(it->second.triggered_count) +
                     " exceeds reached_count " + std::to_string(it->second.reached_count),
                 false});
    } else if (auto wl = load_outcome(pkg_dir, "warning_laden")) {
        // Stage-1 records from an earlier invocation.
        state.record.reached = wl->reached_count;
        state.record.triggered = wl->triggered_count;
    }

    std::optional<ArtifactSetDiff> stage2;
    if (config.stages.count(2) || config.stages.count(3)) {
        auto buggy_it = outcomes.find("buggy");
        auto fixed_it = outcomes.find("fixed");
        if (buggy_it != outcomes.end() && fixed_it != outcomes.end() &&
            buggy_it->second.ok() && fixed_it->second.ok()) {
            stage2 = load_stage2(pkg_dir);
            if (!stage2 && config.stages.count(2)) {
                DisasmOptions disasm;
                disasm.command_template = config.disassembler_cmd;
                // A precise bug with no triggered fault is expected to produce
                // identical binaries; the bitwise check still runs as a sanity
                // check but nothing is disassembled.
                bool expect_identical = bug.precision == Precision::precise &&
                                        state.record.triggered == 0;
                stage2 = diff_artifact_sets(buggy_it->second, fixed_it->second, disasm,
                                            !expect_identical);
                save_stage2(*stage2, pkg_dir);
            }
        }
    }

    if (stage2) {
        for (const auto& a : stage2->structural_anomalies)
            state.anomalies.push_back({"structural", a, false});
        bool any_diff = false;
        bool symbols_ok = true;
        long long functions = 0;
        for (const auto& r : stage2->reports) {
            if (r.bitwise_identical) continue;
            any_diff = true;
            if (r.symbols_available)
                functions += (long long)r.differing.size();
            else
                symbols_ok = false;
        }
        state.record.any_diff = any_diff;
        state.record.symbols_available = symbols_ok;
        state.record.diff_functions = functions;
        if (any_diff && state.record.triggered == 0)
            state.anomalies.push_back(
                {"inconsistency",
                 "binaries differ but no fault was triggered during compilation",
                 bug.precision == Precision::precise});
    }

    // Stage 3 runs only for packages whose artifact pairs actually differ.
    if (config.stages.count(3) && stage2 && state.record.any_diff) {
        auto verdict = load_stage3(pkg_dir);
        if (!verdict) {
            DivergenceVerdict v;
            if (!pkg.test_cmd) {
                v.classification = Divergence::not_run;
                v.infra_detail = "package has no test_cmd";
            } else {
                TestRunOptions opts;
                opts.work_root = pkg_dir / ".tests";
                opts.timeout = config.test_timeout;
                const BuildOutcome& buggy_build = outcomes.at("buggy");
                const BuildOutcome& fixed_build = outcomes.at("fixed");
                TestRun buggy_run = run_tests(pkg, buggy_build, bug.buggy, opts);
                TestRun fixed_run = run_tests(pkg, fixed_build, bug.fixed, opts);
                PreliminaryVerdict prelim = compare_runs(buggy_run, fixed_run);
                switch (prelim.kind) {
                    case PreliminaryVerdict::identical:
                        v.classification = Divergence::identical;
                        v.reruns_performed = 1;
                        break;
                    case PreliminaryVerdict::infra_failure:
                        v.classification = Divergence::infra_failure;
                        v.reruns_performed = 1;
                        v.infra_detail = buggy_run.status != TestStatus::completed
                                             ? buggy_run.infra_detail
                                             : fixed_run.infra_detail;
                        break;
                    case PreliminaryVerdict::divergent_candidate:
                        v = confirm_divergence(pkg, buggy_build, fixed_build, bug.buggy,
                                               bug.fixed, prelim, config.rerun_count, opts);
                        break;
                }
            }
            save_stage3(v, pkg_dir);
            verdict = v;
        }
        state.record.divergence = verdict->classification;
        if (verdict->classification == Divergence::infra_failure) state.infra_failure = true;

        if (!load_worksheet(pkg_dir)) {
            if (const BinaryDiffReport* report = worksheet_candidate(*stage2)) {
                DisasmOptions disasm;
                disasm.command_template = config.disassembler_cmd;
                auto funcs_a = parse_functions(disassemble(report->path_a, disasm), disasm);
                auto funcs_b = parse_functions(disassemble(report->path_b, disasm), disasm);
                InspectionWorksheet sheet =
                    emit_worksheet(*report, funcs_a, funcs_b, config.sample_size,
                                   config.seed, bug.bug_id, pkg.name);
                save_worksheet(sheet, pkg_dir);
            }
        }
    }
    if (auto sheet = load_worksheet(pkg_dir))
        state.record.manual_rating = sheet->impact_rating;

    if (!state.anomalies.empty()) save_anomalies(state.anomalies, pkg_dir);

    std::ostringstream line;
    line << "[" << bug.bug_id << "] " << pkg.name << ": builds=" << state.variant_builds_ok
         << "/" << required.size() << " reached=" << state.record.reached
         << " triggered=" << state.record.triggered
         << " diff=" << (state.record.any_diff ? 1 : 0)
         << " functions=" << state.record.diff_functions
         << " tests=" << to_string(state.record.divergence);
    if (!state.anomalies.empty()) line << " anomalies=" << state.anomalies.size();
    state.progress_line = line.str();
    return state;
}

}  // namespace

void validate_config(const RunConfig& config) {
    if (config.stages.empty()) throw ConfigError("no stages selected");
    for (int s : config.stages)
        if (s < 1 || s > 3) throw ConfigError("invalid stage " + std::to_string(s));
    if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (config.rerun_count < 1) throw ConfigError("rerun_count must be >= 1");
    if (config.run_dir.empty()) throw ConfigError("run_dir is required");
    if (config.disassembler_cmd.find("{binary}") == std::string::npos)
        throw ConfigError("disassembler command template lacks {binary}");
}

RunSummary cmd_run(const RunConfig& config_in) {
    validate_config(config_in);
    // Record paths, capture paths and compiler paths all flow into
    // subprocesses with their own working directories.
    RunConfig config = config_in;
    config.run_dir = fs::absolute(config.run_dir);
    if (!fs::exists(config.bug_file))
        throw ConfigError("bug descriptor not found: " + config.bug_file.string());
    if (!fs::exists(config.manifest_file))
        throw ConfigError("manifest not found: " + config.manifest_file.string());

    BugDescriptor bug = load_bug_descriptor(config.bug_file);
    CorpusManifest manifest = load_manifest(config.manifest_file);
    fs::path bug_dir = config.run_dir / bug.bug_id;

    // Stage gating across invocations: a stage may rely on records produced
    // by an earlier run over the same run_dir.
    if (config.stages.count(2) && !config.stages.count(1) &&
        !any_package_has(bug_dir, "warning_laden/outcome.json"))
        throw ConfigError("stage 2 without stage 1: no stage-1 records under " +
                          bug_dir.string());
    if (config.stages.count(3) && !config.stages.count(2) &&
        !any_package_has(bug_dir, "stage2/reports.json"))
        throw ConfigError("stage 3 without stage 2: no stage-2 records under " +
                          bug_dir.string());

    std::string digest = config_digest(config, bug);
    RunMetadata meta;
    if (auto existing = load_run_metadata(bug_dir)) {
        if (existing->config_digest != digest)
            throw ConfigError("run_dir " + bug_dir.string() +
                              " holds records for a different configuration");
        meta = *existing;
        for (int s : config.stages)
            if (std::find(meta.stages.begin(), meta.stages.end(), s) == meta.stages.end())
                meta.stages.push_back(s);
        std::sort(meta.stages.begin(), meta.stages.end());
        std::set<int> all_stages(meta.stages.begin(), meta.stages.end());
        meta.required_variants = required_variants_for(all_stages);
    } else {
        meta.bug_id = bug.bug_id;
        meta.tool_family = bug.tool_family;
        meta.severity = bug.severity;
        meta.precision = bug.precision;
        meta.stages.assign(config.stages.begin(), config.stages.end());
        meta.required_variants = required_variants_for(config.stages);
        meta.rerun_count = config.rerun_count;
        meta.seed = config.seed;
        meta.sample_size = config.sample_size;
        meta.function_total = config.function_total;
        meta.disassembler_cmd = config.disassembler_cmd;
        meta.config_digest = digest;
    }

    // Toolchain validation before anything builds.
    fs::path scratch = config.run_dir / ".scratch";
    for (const auto& role_name : required_variants_for(config.stages)) {
        const CompilerVariant& v = bug.variant(role_from_name(role_name));
        VariantReport report = validate_variant(v, scratch);
        if (!report.runs)
            throw ConfigError("variant " + v.variant_id + " unusable: " + report.reason);
    }
    if (bug.witness_path) {
        WitnessCheck check = witness_sanity_check(bug, scratch);
        if (!check.compiled)
            throw ConfigError("witness sanity check: " + check.failure);
        if (!check.passed())
            throw ConfigError(
                "witness sanity check failed: reached=" + std::to_string(check.counts.reached) +
                " triggered=" + std::to_string(check.counts.triggered));
    }

    RunSummary summary;
    summary.bug_id = bug.bug_id;
    summary.packages_total = (long long)manifest.packages.size();
    if (config.dry_run) {
        std::cerr << "[" << bug.bug_id << "] dry run: config, toolchain and witness ok; "
                  << manifest.packages.size() << " package(s) would be analysed\n";
        return summary;
    }

    fs::create_directories(bug_dir);
    save_run_metadata(meta, bug_dir);

    std::vector<PackageRunState> states(manifest.packages.size());
    std::atomic<size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= manifest.packages.size()) return;
            const PackageSpec& pkg = manifest.packages[i];
            try {
                states[i] = run_package(pkg, bug, config, bug_dir);
            } catch (const std::exception& e) {
                states[i].errored = true;
                states[i].error_detail = e.what();
                states[i].record.bug_id = bug.bug_id;
                states[i].record.package = pkg.name;
                states[i].progress_line =
                    "[" + bug.bug_id + "] " + pkg.name + ": ERROR " + e.what();
            }
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << states[i].progress_line << "\n";
        }
    };
    size_t width = std::min<size_t>(size_t(config.parallelism), manifest.packages.size());
    std::vector<std::thread> threads;
    for (size_t i = 0; i + 1 < width; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    for (const auto& s : states) {
        summary.variant_builds_ok += s.variant_builds_ok;
        if (s.errored) {
            ++summary.package_errors;
            continue;
        }
        if (s.record.builds_ok) ++summary.builds_ok_pkgs;
        if (s.record.builds_ok && s.record.reached >= 1) ++summary.reached_pkgs;
        if (s.record.builds_ok && s.record.triggered >= 1) ++summary.triggered_pkgs;
        if (s.record.builds_ok && s.record.any_diff) ++summary.diff_pkgs;
        if (s.record.builds_ok && s.record.any_diff && s.record.symbols_available)
            summary.diff_functions += s.record.diff_functions;
        if (s.record.divergence == Divergence::divergent) ++summary.test_diffs;
        if (s.infra_failure) ++summary.infra_failures;
        summary.anomalies += (long long)s.anomalies.size();
        for (const auto& a : s.anomalies) {
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "[" << bug.bug_id << "] anomaly (" << a.kind << ", "
                      << (a.hard ? "hard" : "soft") << ") " << s.record.package << ": "
                      << a.detail << "\n";
        }
    }

    ordered_json doc;
    doc["bug_id"] = summary.bug_id;
    doc["packages_total"] = summary.packages_total;
    doc["variant_builds_ok"] = summary.variant_builds_ok;
    doc["builds_ok_pkgs"] = summary.builds_ok_pkgs;
    doc["reached_pkgs"] = summary.reached_pkgs;
    doc["triggered_pkgs"] = summary.triggered_pkgs;
    doc["diff_pkgs"] = summary.diff_pkgs;
    doc["diff_functions"] = summary.diff_functions;
    doc["test_diffs"] = summary.test_diffs;
    doc["anomalies"] = summary.anomalies;
    doc["infra_failures"] = summary.infra_failures;
    doc["package_errors"] = summary.package_errors;
    write_file_atomic(bug_dir / "summary.json", doc.dump(2) + "\n");
    return summary;
}

std::string render_summary(const RunSummary& s) {
    std::ostringstream out;
    out << "bug " << s.bug_id << ": packages=" << s.packages_total
        << " variant_builds_ok=" << s.variant_builds_ok
        << " builds_ok_pkgs=" << s.builds_ok_pkgs << " reached=" << s.reached_pkgs
        << " triggered=" << s.triggered_pkgs << " diff_pkgs=" << s.diff_pkgs
        << " diff_functions=" << s.diff_functions << " test_diffs=" << s.test_diffs
        << " anomalies=" << s.anomalies << " infra_failures=" << s.infra_failures
        << " errors=" << s.package_errors << "\n";
    return out.str();
}

CorpusVerifyResult cmd_corpus_verify(const fs::path& manifest_path, const fs::path& cc_path,
                                     const fs::path& cxx_path, const fs::path& work_root,
                                     const fs::path& output_path) {
    if (!fs::exists(manifest_path))
        throw ConfigError("manifest not found: " + manifest_path.string());
    CorpusManifest manifest = load_manifest(manifest_path);

    CompilerVariant variant;
    variant.variant_id = "corpus-verify";
    variant.role = VariantRole::fixed;
    variant.c_compiler_path = cc_path;
    variant.cxx_compiler_path = cxx_path.empty() ? cc_path : cxx_path;
    VariantReport report = validate_variant(variant, work_root / ".scratch");
    if (!report.runs)
        throw ConfigError("compiler unusable for corpus verify: " + report.reason);

    CorpusVerifyResult result;
    for (auto& pkg : manifest.packages) {
        BuildOptions options;
        options.work_root = work_root;
        try {
            ReproVerdict verdict = check_reproducibility(pkg, variant, options);
            if (verdict.verified) {
                result.verified.push_back(pkg.name);
                std::cerr << pkg.name << ": verified\n";
            } else {
                result.failed.push_back(pkg.name);
                std::cerr << pkg.name << ": failed";
                if (!verdict.error.empty()) std::cerr << " (" << verdict.error << ")";
                for (const auto& p : verdict.differing_paths) std::cerr << " " << p;
                std::cerr << "\n";
            }
        } catch (const std::exception& e) {
            result.errored.push_back(pkg.name);
            std::cerr << pkg.name << ": error: " << e.what() << "\n";
        }
    }
    save_manifest(manifest, output_path);
    return result;
}

std::vector<PackageImpactRecord> load_package_records(const fs::path& bug_dir,
                                                      const RunMetadata& meta) {
    std::vector<PackageImpactRecord> records;
    std::vector<fs::path> pkg_dirs;
    for (const auto& entry : fs::directory_iterator(bug_dir))
        if (entry.is_directory()) pkg_dirs.push_back(entry.path());
    std::sort(pkg_dirs.begin(), pkg_dirs.end());

    for (const auto& pkg_dir : pkg_dirs) {
        PackageImpactRecord rec;
        rec.bug_id = meta.bug_id;
        rec.package = pkg_dir.filename().string();

        bool all_ok = !meta.required_variants.empty();
        for (const auto& role_name : meta.required_variants) {
            auto outcome = load_outcome(pkg_dir, role_name);
            all_ok = all_ok && outcome && outcome->ok();
        }
        rec.builds_ok = all_ok;

        if (auto wl = load_outcome(pkg_dir, "warning_laden")) {
            rec.reached = wl->reached_count;
            rec.triggered = wl->triggered_count;
        }
        if (auto stage2 = load_stage2(pkg_dir)) {
            bool symbols_ok = true;
            for (const auto& r : stage2->reports) {
                if (r.bitwise_identical) continue;
                rec.any_diff = true;
                if (r.symbols_available)
                    rec.diff_functions += (long long)r.differing.size();
                else
                    symbols_ok = false;
            }
            rec.symbols_available = symbols_ok;
        }
        if (auto verdict = load_stage3(pkg_dir)) rec.divergence = verdict->classification;
        if (auto sheet = load_worksheet(pkg_dir)) rec.manual_rating = sheet->impact_rating;
        records.push_back(std::move(rec));
    }
    return records;
}

std::optional<long long> function_total_from_records(const fs::path& run_dir) {
    if (!fs::exists(run_dir)) return std::nullopt;
    std::optional<long long> best;
    for (const auto& bug_entry : fs::directory_iterator(run_dir)) {
        if (!bug_entry.is_directory() || !fs::exists(bug_entry.path() / "run.json"))
            continue;
        std::vector<BinaryDiffReport> reports;
        for (const auto& pkg_entry : fs::directory_iterator(bug_entry.path())) {
            if (!pkg_entry.is_directory()) continue;
            if (auto stage2 = load_stage2(pkg_entry.path()))
                reports.insert(reports.end(), stage2->reports.begin(),
                               stage2->reports.end());
        }
        if (auto total = recompute_function_total(reports))
            if (!best || *total > *best) best = total;
    }
    return best;
}

std::string cmd_report(const fs::path& run_dir, GroupKey group_by, TableFormat format,
                       std::optional<long long> function_total_override) {
    if (!fs::exists(run_dir)) throw ConfigError("no records: " + run_dir.string());

    std::vector<fs::path> bug_dirs;
    for (const auto& entry : fs::directory_iterator(run_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "run.json"))
            bug_dirs.push_back(entry.path());
    std::sort(bug_dirs.begin(), bug_dirs.end());
    if (bug_dirs.empty()) throw ConfigError("no records under " + run_dir.string());

    std::vector<ImpactRow> rows;
    long long function_total = function_total_override.value_or(0);
    for (const auto& bug_dir : bug_dirs) {
        RunMetadata meta = *load_run_metadata(bug_dir);
        if (!function_total_override && function_total == 0)
            function_total = meta.function_total;

        BugDescriptor bug;
        bug.bug_id = meta.bug_id;
        bug.tool_family = meta.tool_family;
        bug.severity = meta.severity;
        bug.precision = meta.precision;

        auto records = load_package_records(bug_dir, meta);
        ImpactRow row = build_row(bug, records);
        for (const auto& note : row.soft_anomalies)
            std::cerr << "soft anomaly: " << note << "\n";
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(),
              [](const ImpactRow& a, const ImpactRow& b) { return a.bug_id < b.bug_id; });
    if (function_total == 0) function_total = 202000;

    ImpactTable table;
    table.total_functions = function_total;
    if (group_by == GroupKey::bug) {
        table.rows = rows;
        table.aggregates = aggregate(rows, GroupKey::all, function_total);
    } else {
        // Aggregate-only view; reconcile against the rows before dropping them.
        table.aggregates = aggregate(rows, group_by, function_total);
        verify_reconciliation(rows, table.aggregates, function_total);
    }
    return render(table, format);
}

}  // namespace impact
