#include <impact/toolchain.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>
#include <impact/subprocess.hpp>

#include <json.hpp>

#include <unistd.h>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace impact {

std::string to_string(VariantRole r) {
    switch (r) {
        case VariantRole::buggy: return "buggy";
        case VariantRole::fixed: return "fixed";
        case VariantRole::warning_laden: return "warning_laden";
    }
    return "fixed";
}

std::string to_string(ToolFamily t) {
    switch (t) {
        case ToolFamily::csmith: return "csmith";
        case ToolFamily::emi: return "emi";
        case ToolFamily::orange: return "orange";
        case ToolFamily::yarpgen: return "yarpgen";
        case ToolFamily::alive: return "alive";
        case ToolFamily::user: return "user";
    }
    return "user";
}

std::string to_string(Severity s) {
    switch (s) {
        case Severity::enhancement: return "enhancement";
        case Severity::normal: return "normal";
        case Severity::release_blocker: return "release_blocker";
    }
    return "normal";
}

std::string to_string(Precision p) {
    return p == Precision::precise ? "precise" : "over_approximating";
}

VariantRole variant_role_from_string(const std::string& s) {
    if (s == "buggy") return VariantRole::buggy;
    if (s == "fixed") return VariantRole::fixed;
    if (s == "warning_laden") return VariantRole::warning_laden;
    throw ParseError("invalid variant role: \"" + s + "\"");
}

ToolFamily tool_family_from_string(const std::string& s) {
    if (s == "csmith") return ToolFamily::csmith;
    if (s == "emi") return ToolFamily::emi;
    if (s == "orange") return ToolFamily::orange;
    if (s == "yarpgen") return ToolFamily::yarpgen;
    if (s == "alive") return ToolFamily::alive;
    if (s == "user") return ToolFamily::user;
    throw ParseError("invalid tool family: \"" + s + "\"");
}

Severity severity_from_string(const std::string& s) {
    if (s == "enhancement") return Severity::enhancement;
    if (s == "normal") return Severity::normal;
    if (s == "release_blocker") return Severity::release_blocker;
    throw ParseError("invalid severity: \"" + s + "\"");
}

Precision precision_from_string(const std::string& s) {
    if (s == "precise") return Precision::precise;
    if (s == "over_approximating") return Precision::over_approximating;
    throw ParseError("invalid precision: \"" + s + "\"");
}

const CompilerVariant& BugDescriptor::variant(VariantRole role) const {
    switch (role) {
        case VariantRole::buggy: return buggy;
        case VariantRole::fixed: return fixed;
        case VariantRole::warning_laden: return warning_laden;
    }
    return fixed;
}

void validate_bug(const BugDescriptor& bug) {
    if (bug.bug_id.empty()) throw ValidationError("bug_id is empty");
    if (bug.reached_marker.empty() || bug.triggered_marker.empty())
        throw ValidationError("bug " + bug.bug_id + ": markers must be nonempty");
    if (bug.reached_marker == bug.triggered_marker)
        throw ValidationError("bug " + bug.bug_id + ": markers must differ");
    if (bug.reached_marker.find(bug.triggered_marker) != std::string::npos ||
        bug.triggered_marker.find(bug.reached_marker) != std::string::npos)
        throw ValidationError("bug " + bug.bug_id +
                              ": one marker is a substring of the other");
    if (bug.buggy.role != VariantRole::buggy || bug.fixed.role != VariantRole::fixed ||
        bug.warning_laden.role != VariantRole::warning_laden)
        throw ValidationError("bug " + bug.bug_id + ": variant roles are mislabeled");
}

namespace {

bool is_executable_file(const fs::path& p) {
    return fs::exists(p) && fs::is_regular_file(p) && access(p.c_str(), X_OK) == 0;
}

CompilerVariant parse_variant(const ordered_json& obj, VariantRole role,
                              const std::string& bug_id, bool check_paths) {
    CompilerVariant v;
    v.role = role;
    v.variant_id = obj.value("variant_id", bug_id + "-" + to_string(role));
    v.c_compiler_path = obj.at("cc").get<std::string>();
    v.cxx_compiler_path = obj.value("cxx", obj.at("cc").get<std::string>());
    if (obj.contains("extra_env"))
        v.extra_env = obj["extra_env"].get<std::map<std::string, std::string>>();
    v.revision_scrubbed = obj.value("revision_scrubbed", false);
    if (check_paths) {
        for (const auto& p : {v.c_compiler_path, v.cxx_compiler_path}) {
            if (!is_executable_file(p))
                throw ValidationError("bug " + bug_id + " variant " + v.variant_id +
                                      ": compiler not executable: " + p.string());
        }
    }
    return v;
}

}  // namespace

BugDescriptor load_bug_descriptor(const fs::path& path, bool check_paths) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed bug descriptor " + path.string() + ": " + e.what());
    }
    BugDescriptor bug;
    try {
        bug.bug_id = doc.at("bug_id").get<std::string>();
        bug.tool_family = tool_family_from_string(doc.at("tool_family").get<std::string>());
        bug.severity = severity_from_string(doc.at("severity").get<std::string>());
        bug.precision = precision_from_string(doc.at("precision").get<std::string>());
        bug.reached_marker =
            doc.value("reached_marker", "IMPACT-REACHED:" + bug.bug_id);
        bug.triggered_marker =
            doc.value("triggered_marker", "IMPACT-TRIGGERED:" + bug.bug_id);
        if (doc.contains("witness_path") && !doc["witness_path"].is_null())
            bug.witness_path = fs::path(doc["witness_path"].get<std::string>());
        const auto& variants = doc.at("variants");
        bug.buggy = parse_variant(variants.at("buggy"), VariantRole::buggy, bug.bug_id,
                                  check_paths);
        bug.fixed = parse_variant(variants.at("fixed"), VariantRole::fixed, bug.bug_id,
                                  check_paths);
        bug.warning_laden = parse_variant(variants.at("warning_laden"),
                                          VariantRole::warning_laden, bug.bug_id,
                                          check_paths);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed bug descriptor " + path.string() + ": " + e.what());
    }
    validate_bug(bug);
    return bug;
}

VariantReport validate_variant(const CompilerVariant& v, const fs::path& scratch_dir) {
    VariantReport report;
    if (!fs::exists(v.c_compiler_path)) {
        report.reason = "not-found";
        return report;
    }
    if (!is_executable_file(v.c_compiler_path)) {
        report.reason = "not-executable";
        return report;
    }

    // Paths are embedded in a command that runs under a different working
    // directory, so they must be absolute.
    fs::path scratch = fs::absolute(scratch_dir);
    fs::create_directories(scratch);
    fs::path tu = scratch / ("smoke-" + v.variant_id + ".c");
    fs::path obj = scratch / ("smoke-" + v.variant_id + ".o");
    write_file_atomic(tu, "int impact_smoke(void) { return 0; }\n");

    CommandSpec compile;
    compile.shell_command = shell_quote(fs::absolute(v.c_compiler_path).string()) +
                            " -c " + shell_quote(tu.string()) + " -o " +
                            shell_quote(obj.string());
    compile.working_dir = scratch;
    compile.env = v.extra_env;
    compile.stdout_path = scratch / ("smoke-" + v.variant_id + ".log");
    compile.timeout = std::chrono::minutes(2);
    CommandResult r = run_command(compile);
    if (!r.ok()) {
        report.reason = "compile-failed";
        return report;
    }
    report.runs = true;

    std::string version_out;
    CommandSpec version;
    version.shell_command = shell_quote(v.c_compiler_path.string()) + " --version";
    version.env = v.extra_env;
    version.timeout = std::chrono::seconds(30);
    if (run_command_capture(version, version_out).ok()) {
        auto lines = split_lines(version_out);
        if (!lines.empty()) report.version_string = lines.front();
    }
    return report;
}

MarkerCounts count_markers(const std::string& text, const BugDescriptor& bug) {
    MarkerCounts counts;
    for (const auto& line : split_lines(text)) {
        if (line.find(bug.reached_marker) != std::string::npos) ++counts.reached;
        if (line.find(bug.triggered_marker) != std::string::npos) ++counts.triggered;
    }
    return counts;
}

WitnessCheck witness_sanity_check(const BugDescriptor& bug, const fs::path& scratch_dir) {
    if (!bug.witness_path)
        throw ConfigError("bug " + bug.bug_id + " has no witness_path");
    if (!fs::exists(*bug.witness_path))
        throw IoError("witness does not exist: " + bug.witness_path->string());

    fs::path scratch = fs::absolute(scratch_dir);
    fs::create_directories(scratch);
    const CompilerVariant& wl = bug.warning_laden;
    std::string ext = bug.witness_path->extension().string();
    const fs::path& compiler =
        (ext == ".c") ? wl.c_compiler_path : wl.cxx_compiler_path;
    fs::path obj = scratch / "witness.o";

    CommandSpec compile;
    compile.shell_command = shell_quote(fs::absolute(compiler).string()) + " -c " +
                            shell_quote(fs::absolute(*bug.witness_path).string()) +
                            " -o " + shell_quote(obj.string());
    compile.working_dir = scratch;
    compile.env = wl.extra_env;
    compile.timeout = std::chrono::minutes(10);

    std::string output;
    CommandResult r = run_command_capture(compile, output);

    WitnessCheck check;
    check.counts = count_markers(output, bug);
    if (!r.ok()) {
        check.compiled = false;
        check.failure = r.timed_out ? "witness compile timed out"
                                    : "witness compile failed with exit " +
                                          std::to_string(r.exit_code);
        return check;
    }
    check.compiled = true;
    return check;
}

bool assert_no_revision_marker(const fs::path& binary_path,
                               const std::vector<std::string>& forbidden_substrings) {
    std::string bytes = read_file(binary_path);
    for (const auto& needle : forbidden_substrings) {
        if (needle.empty()) continue;
        if (bytes.find(needle) != std::string::npos) return false;
    }
    return true;
}

}  // namespace impact
