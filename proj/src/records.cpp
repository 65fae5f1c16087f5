#include <impact/records.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace impact {

namespace {

void save_json(const ordered_json& doc, const fs::path& path) {
    fs::create_directories(path.parent_path());
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::optional<ordered_json> load_json(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    try {
        return ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed record " + path.string() + ": " + e.what());
    }
}

ordered_json opt_long(const std::optional<long long>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<long long> as_opt_long(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<long long>();
}

}  // namespace

void save_outcome(const BuildOutcome& outcome, const fs::path& pkg_dir,
                  const std::string& variant_dir_name) {
    ordered_json doc;
    doc["package"] = outcome.package;
    doc["variant_id"] = outcome.variant_id;
    doc["status"] = to_string(outcome.status);
    doc["failure_reason"] = outcome.failure_reason;
    doc["log_path"] = variant_dir_name + "/build.log";
    doc["reached_count"] = outcome.reached_count;
    doc["triggered_count"] = outcome.triggered_count;
    doc["artifacts"] = ordered_json::array();
    for (const auto& a : outcome.artifacts) {
        ordered_json rec;
        rec["path"] = a.rel_path;
        rec["size"] = a.size;
        rec["sha256"] = a.digest;
        doc["artifacts"].push_back(std::move(rec));
    }
    doc["wall_seconds"] = outcome.wall_seconds;
    doc["build_dir"] = variant_dir_name + "/tree";
    save_json(doc, pkg_dir / variant_dir_name / "outcome.json");
}

std::optional<BuildOutcome> load_outcome(const fs::path& pkg_dir,
                                         const std::string& variant_dir_name) {
    auto doc = load_json(pkg_dir / variant_dir_name / "outcome.json");
    if (!doc) return std::nullopt;
    BuildOutcome o;
    o.package = doc->at("package").get<std::string>();
    o.variant_id = doc->at("variant_id").get<std::string>();
    o.status = build_status_from_string(doc->at("status").get<std::string>());
    o.failure_reason = doc->value("failure_reason", std::string());
    o.log_path = pkg_dir / doc->at("log_path").get<std::string>();
    o.reached_count = doc->at("reached_count").get<long long>();
    o.triggered_count = doc->at("triggered_count").get<long long>();
    for (const auto& rec : doc->at("artifacts")) {
        ArtifactRecord a;
        a.rel_path = rec.at("path").get<std::string>();
        a.size = rec.at("size").get<uint64_t>();
        a.digest = rec.at("sha256").get<std::string>();
        o.artifacts.push_back(std::move(a));
    }
    o.wall_seconds = doc->at("wall_seconds").get<double>();
    o.build_dir = pkg_dir / doc->at("build_dir").get<std::string>();
    return o;
}

void save_stage2(const ArtifactSetDiff& diff, const fs::path& pkg_dir) {
    ordered_json doc;
    doc["reports"] = ordered_json::array();
    for (const auto& r : diff.reports) {
        ordered_json rec;
        rec["artifact"] = r.rel_path;
        rec["bitwise_identical"] = r.bitwise_identical;
        rec["symbols_available"] = r.symbols_available;
        rec["functions_total_a"] = opt_long(r.functions_total_a);
        rec["functions_total_b"] = opt_long(r.functions_total_b);
        rec["matched"] = opt_long(r.matched);
        rec["differing"] = r.differing;
        rec["added"] = r.added;
        rec["removed"] = r.removed;
        rec["error"] = r.error;
        doc["reports"].push_back(std::move(rec));
    }
    doc["structural_anomalies"] = diff.structural_anomalies;
    save_json(doc, pkg_dir / "stage2" / "reports.json");
}

std::optional<ArtifactSetDiff> load_stage2(const fs::path& pkg_dir) {
    auto doc = load_json(pkg_dir / "stage2" / "reports.json");
    if (!doc) return std::nullopt;
    ArtifactSetDiff diff;
    for (const auto& rec : doc->at("reports")) {
        BinaryDiffReport r;
        r.rel_path = rec.at("artifact").get<std::string>();
        // Artifact pairs are always buggy-vs-fixed in this record layout.
        r.path_a = pkg_dir / "buggy" / "tree" / r.rel_path;
        r.path_b = pkg_dir / "fixed" / "tree" / r.rel_path;
        r.bitwise_identical = rec.at("bitwise_identical").get<bool>();
        r.symbols_available = rec.at("symbols_available").get<bool>();
        r.functions_total_a = as_opt_long(rec.at("functions_total_a"));
        r.functions_total_b = as_opt_long(rec.at("functions_total_b"));
        r.matched = as_opt_long(rec.at("matched"));
        r.differing = rec.at("differing").get<std::vector<std::string>>();
        r.added = rec.at("added").get<std::vector<std::string>>();
        r.removed = rec.at("removed").get<std::vector<std::string>>();
        r.error = rec.value("error", std::string());
        diff.reports.push_back(std::move(r));
    }
    diff.structural_anomalies =
        doc->at("structural_anomalies").get<std::vector<std::string>>();
    return diff;
}

void save_stage3(const DivergenceVerdict& verdict, const fs::path& pkg_dir) {
    ordered_json doc;
    doc["classification"] = to_string(verdict.classification);
    doc["divergent_tests"] = verdict.divergent_tests;
    doc["reruns_performed"] = verdict.reruns_performed;
    doc["reproducible"] = verdict.reproducible;
    doc["flaky_tests"] = verdict.flaky_tests;
    doc["infra_detail"] = verdict.infra_detail;
    save_json(doc, pkg_dir / "stage3" / "verdict.json");
}

std::optional<DivergenceVerdict> load_stage3(const fs::path& pkg_dir) {
    auto doc = load_json(pkg_dir / "stage3" / "verdict.json");
    if (!doc) return std::nullopt;
    DivergenceVerdict v;
    v.classification = divergence_from_string(doc->at("classification").get<std::string>());
    v.divergent_tests = doc->at("divergent_tests").get<std::vector<std::string>>();
    v.reruns_performed = doc->at("reruns_performed").get<long long>();
    v.reproducible = doc->at("reproducible").get<bool>();
    v.flaky_tests = doc->at("flaky_tests").get<std::vector<std::string>>();
    v.infra_detail = doc->value("infra_detail", std::string());
    return v;
}

void save_worksheet(const InspectionWorksheet& sheet, const fs::path& pkg_dir) {
    ordered_json doc;
    doc["bug_id"] = sheet.bug_id;
    doc["package"] = sheet.package;
    doc["seed"] = sheet.seed;
    doc["sample_size"] = sheet.sample_size;
    doc["sampled_functions"] = ordered_json::array();
    for (const auto& wf : sheet.sampled_functions) {
        ordered_json rec;
        rec["name"] = wf.name;
        rec["opcode_diff"] = wf.opcode_diff;
        rec["raw_a"] = wf.raw_a;
        rec["raw_b"] = wf.raw_b;
        doc["sampled_functions"].push_back(std::move(rec));
    }
    doc["verdict"] = sheet.verdict_field;
    doc["impact_rating"] =
        sheet.impact_rating ? ordered_json(*sheet.impact_rating) : ordered_json(nullptr);
    save_json(doc, pkg_dir / "stage3" / "worksheet.json");
    write_file_atomic(pkg_dir / "stage3" / "worksheet.md",
                      render_worksheet_markdown(sheet));
}

std::optional<InspectionWorksheet> load_worksheet(const fs::path& pkg_dir) {
    auto doc = load_json(pkg_dir / "stage3" / "worksheet.json");
    if (!doc) return std::nullopt;
    InspectionWorksheet sheet;
    sheet.bug_id = doc->at("bug_id").get<std::string>();
    sheet.package = doc->at("package").get<std::string>();
    sheet.seed = doc->at("seed").get<long long>();
    sheet.sample_size = doc->at("sample_size").get<long long>();
    for (const auto& rec : doc->at("sampled_functions")) {
        WorksheetFunction wf;
        wf.name = rec.at("name").get<std::string>();
        wf.opcode_diff = rec.at("opcode_diff").get<std::vector<std::string>>();
        wf.raw_a = rec.at("raw_a").get<std::vector<std::string>>();
        wf.raw_b = rec.at("raw_b").get<std::vector<std::string>>();
        sheet.sampled_functions.push_back(std::move(wf));
    }
    sheet.verdict_field = doc->value("verdict", std::string());
    if (doc->contains("impact_rating") && !(*doc)["impact_rating"].is_null())
        sheet.impact_rating = (*doc)["impact_rating"].get<std::string>();
    return sheet;
}

void save_anomalies(const std::vector<AnomalyRecord>& anomalies, const fs::path& pkg_dir) {
    ordered_json doc = ordered_json::array();
    for (const auto& a : anomalies) {
        ordered_json rec;
        rec["kind"] = a.kind;
        rec["detail"] = a.detail;
        rec["hard"] = a.hard;
        doc.push_back(std::move(rec));
    }
    save_json(doc, pkg_dir / "anomalies.json");
}

std::vector<AnomalyRecord> load_anomalies(const fs::path& pkg_dir) {
    auto doc = load_json(pkg_dir / "anomalies.json");
    std::vector<AnomalyRecord> out;
    if (!doc) return out;
    for (const auto& rec : *doc) {
        AnomalyRecord a;
        a.kind = rec.at("kind").get<std::string>();
        a.detail = rec.at("detail").get<std::string>();
        a.hard = rec.at("hard").get<bool>();
        out.push_back(std::move(a));
    }
    return out;
}

void save_run_metadata(const RunMetadata& meta, const fs::path& bug_dir) {
    ordered_json doc;
    doc["bug_id"] = meta.bug_id;
    doc["tool_family"] = to_string(meta.tool_family);
    doc["severity"] = to_string(meta.severity);
    doc["precision"] = to_string(meta.precision);
    doc["stages"] = meta.stages;
    doc["required_variants"] = meta.required_variants;
    doc["rerun_count"] = meta.rerun_count;
    doc["seed"] = meta.seed;
    doc["sample_size"] = meta.sample_size;
    doc["function_total"] = meta.function_total;
    doc["disassembler_cmd"] = meta.disassembler_cmd;
    doc["config_digest"] = meta.config_digest;
    save_json(doc, bug_dir / "run.json");
}

std::optional<RunMetadata> load_run_metadata(const fs::path& bug_dir) {
    auto doc = load_json(bug_dir / "run.json");
    if (!doc) return std::nullopt;
    RunMetadata meta;
    meta.bug_id = doc->at("bug_id").get<std::string>();
    meta.tool_family = tool_family_from_string(doc->at("tool_family").get<std::string>());
    meta.severity = severity_from_string(doc->at("severity").get<std::string>());
    meta.precision = precision_from_string(doc->at("precision").get<std::string>());
    meta.stages = doc->at("stages").get<std::vector<int>>();
    meta.required_variants = doc->at("required_variants").get<std::vector<std::string>>();
    meta.rerun_count = doc->at("rerun_count").get<long long>();
    meta.seed = doc->at("seed").get<long long>();
    meta.sample_size = doc->at("sample_size").get<long long>();
    meta.function_total = doc->at("function_total").get<long long>();
    meta.disassembler_cmd = doc->at("disassembler_cmd").get<std::string>();
    meta.config_digest = doc->at("config_digest").get<std::string>();
    return meta;
}

}  // namespace impact
