#pragma once

#include <impact/dyncompare.hpp>
#include <impact/toolchain.hpp>

#include <optional>
#include <string>
#include <vector>

namespace impact {

// Everything the impact tables need about one (bug, package) pair, assembled
// from the record store (or constructed directly in fixtures).
struct PackageImpactRecord {
    std::string bug_id;
    std::string package;
    bool builds_ok = false;  // every variant required by the executed stages built
    long long reached = 0;
    long long triggered = 0;
    bool any_diff = false;           // >= 1 non-bitwise-identical artifact
    bool symbols_available = true;   // function counting possible
    long long diff_functions = 0;    // |differing| summed over the package's artifacts
    Divergence divergence = Divergence::not_run;
    std::optional<std::string> manual_rating;
};

struct ImpactRow {
    std::string bug_id;
    ToolFamily tool_family = ToolFamily::user;
    Severity severity = Severity::normal;
    Precision precision = Precision::over_approximating;
    long long builds_ok = 0;
    long long reached_pkgs = 0;
    long long triggered_pkgs = 0;
    long long diff_pkgs = 0;
    // Function counts are meaningful only when diff_pkgs > 0; rendered "-"
    // otherwise. Packages without symbols are excluded from the sum and
    // counted separately.
    long long diff_functions = 0;
    long long symbol_excluded_pkgs = 0;
    std::optional<long long> test_diffs;  // absent when stage 3 never applied
    std::optional<std::string> manual_rating;
    std::vector<std::string> soft_anomalies;  // e.g. diff_pkgs > triggered_pkgs
};

// Builds one table row from a bug's package records. Throws on records from
// another bug, and on diff_pkgs > triggered_pkgs for a precise bug (for
// over-approximating bugs that is recorded as a soft anomaly instead).
ImpactRow build_row(const BugDescriptor& bug,
                    const std::vector<PackageImpactRecord>& records);

// Display string for diff_functions / total_functions:
//   "-"        when the total is unknown,
//   "0%"       only when diff_functions == 0,
//   "<0.1%"    when 0 < fraction < 0.001,
//   one decimal place otherwise (half away from zero).
std::string function_fraction(long long diff_functions,
                              std::optional<long long> total_functions);

// Whole-percent display (half away from zero), with "0%" only for an exact
// zero, "<0.1%" below a thousandth, and one decimal place for fractions whose
// whole-percent rounding would print 0.
std::string render_percent(long long numerator, long long denominator);

enum class GroupKey { bug, tool, severity, all };

struct AggregateRow {
    GroupKey key = GroupKey::all;
    std::string group;  // tool/severity name, or "ALL"
    long long bugs = 0;
    // Package-level sums over member rows.
    long long builds_ok = 0;
    long long reached_pkgs = 0;
    long long triggered_pkgs = 0;
    long long diff_pkgs = 0;
    long long diff_functions = 0;
    long long symbol_excluded_pkgs = 0;
    std::optional<long long> test_diffs;  // absent when no member row has a value
    // Bug-level counts (a bug counts when its per-package count is >= 1).
    long long bugs_reached = 0;
    long long bugs_triggered = 0;
    long long bugs_triggered_precise = 0;
    long long bugs_with_diffs = 0;
    long long bugs_with_test_diffs = 0;
    // Derived display strings, denominators = summed builds_ok (and the
    // function total scaled by bugs_with_diffs for the fraction).
    std::string reached_pct;
    std::string triggered_pct;
    std::string diff_pkgs_pct;
    std::string test_diffs_pct;
    std::string diff_function_fraction;
};

// Groups rows canonically (declaration order of the enums; GroupKey::all
// yields one "ALL" row) and derives sums and percentages. Results do not
// depend on the input row order.
std::vector<AggregateRow> aggregate(const std::vector<ImpactRow>& rows, GroupKey key,
                                    long long total_functions = 202000);

enum class TableFormat { markdown, csv };

struct ImpactTable {
    std::vector<ImpactRow> rows;            // empty for aggregate-only views
    std::vector<AggregateRow> aggregates;
    long long total_functions = 202000;
};

// Re-derives every aggregate from its member rows and throws ValidationError
// on any summed-field mismatch. No-op when rows are empty.
void verify_reconciliation(const std::vector<ImpactRow>& rows,
                           const std::vector<AggregateRow>& aggregates,
                           long long total_functions);

// Deterministic rendering. CSV with per-bug rows uses the fixed schema
//   bug_id,severity,builds_ok,reached,triggered,precision,diff_pkgs,
//   diff_functions,diff_fraction,test_diffs,manual_rating
// (LF newlines, absent values "-"); aggregate-only CSV uses an analogous
// group schema. Every aggregate is re-derived from the member rows first and
// a mismatch throws (reconciliation check).
std::string render(const ImpactTable& table, TableFormat format);

// Sums the buggy-side function totals recorded by stage-2 reports; absent
// when no report carries one (identical artifact pairs are never
// disassembled, so this is a lower bound maintained for corpus-wide runs).
std::optional<long long> recompute_function_total(
    const std::vector<BinaryDiffReport>& reports);

}  // namespace impact
