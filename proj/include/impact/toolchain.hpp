#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace impact {

enum class VariantRole { buggy, fixed, warning_laden };
enum class ToolFamily { csmith, emi, orange, yarpgen, alive, user };
enum class Severity { enhancement, normal, release_blocker };
enum class Precision { precise, over_approximating };

std::string to_string(VariantRole r);
std::string to_string(ToolFamily t);
std::string to_string(Severity s);
std::string to_string(Precision p);
VariantRole variant_role_from_string(const std::string& s);
ToolFamily tool_family_from_string(const std::string& s);
Severity severity_from_string(const std::string& s);
Precision precision_from_string(const std::string& s);

// One of the three compiler installations associated with a bug. Injected
// into package builds through the environment (CC/CXX plus extra_env) rather
// than by swapping a system default.
struct CompilerVariant {
    std::string variant_id;
    VariantRole role = VariantRole::fixed;
    std::filesystem::path c_compiler_path;
    std::filesystem::path cxx_compiler_path;
    std::map<std::string, std::string> extra_env;
    bool revision_scrubbed = false;
};

struct BugDescriptor {
    std::string bug_id;
    ToolFamily tool_family = ToolFamily::user;
    Severity severity = Severity::normal;
    Precision precision = Precision::over_approximating;
    CompilerVariant buggy;
    CompilerVariant fixed;
    CompilerVariant warning_laden;
    std::string reached_marker;
    std::string triggered_marker;
    std::optional<std::filesystem::path> witness_path;

    const CompilerVariant& variant(VariantRole role) const;
};

// Checks marker invariants (nonempty, distinct, neither a substring of the
// other) and enum sanity; throws ValidationError.
void validate_bug(const BugDescriptor& bug);

// Descriptor file, one document per bug. `check_paths` additionally requires
// the compiler paths to exist and be executable (registration-time check);
// pass false when re-reading descriptors from a record store long after the
// toolchains are gone.
BugDescriptor load_bug_descriptor(const std::filesystem::path& path, bool check_paths = true);

struct VariantReport {
    bool runs = false;
    std::string reason;          // "not-found", "not-executable", "compile-failed"
    std::string version_string;  // first line of `<cc> --version` when available
};

// Smoke test: compiles a trivial translation unit with the variant's C
// compiler in a scratch directory. Failures land in the report, never throw.
VariantReport validate_variant(const CompilerVariant& v,
                               const std::filesystem::path& scratch_dir);

struct MarkerCounts {
    long long reached = 0;
    long long triggered = 0;
};

// Per-line marker scan over a byte buffer: a line containing both markers
// increments both counters.
MarkerCounts count_markers(const std::string& text, const BugDescriptor& bug);

struct WitnessCheck {
    bool compiled = false;
    MarkerCounts counts;
    std::string failure;  // set when the witness did not compile

    bool passed() const { return compiled && counts.reached >= 1 && counts.triggered >= 1; }
};

// Compiles the bug-report miscompilation sample with the warning-laden
// variant and counts marker occurrences in the combined compiler output.
// A compile failure is reported distinctly from marker absence.
WitnessCheck witness_sanity_check(const BugDescriptor& bug,
                                  const std::filesystem::path& scratch_dir);

// True iff none of the forbidden substrings occur in the file's bytes.
bool assert_no_revision_marker(const std::filesystem::path& binary_path,
                               const std::vector<std::string>& forbidden_substrings);

}  // namespace impact
