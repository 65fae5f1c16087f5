#include <impact/report.hpp>

#include <impact/errors.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace impact {

namespace {

int rating_rank(const std::string& r) {
    if (r == "none") return 0;
    if (r == "very_low") return 1;
    if (r == "low") return 2;
    if (r == "medium") return 3;
    if (r == "high") return 4;
    throw ParseError("invalid impact rating: \"" + r + "\"");
}

void validate_row(const ImpactRow& row) {
    if (!(row.triggered_pkgs <= row.reached_pkgs && row.reached_pkgs <= row.builds_ok))
        throw ValidationError("row " + row.bug_id +
                              ": triggered <= reached <= builds_ok violated");
    if (row.test_diffs && *row.test_diffs > row.diff_pkgs)
        throw ValidationError("row " + row.bug_id + ": test_diffs > diff_pkgs");
}

}  // namespace

ImpactRow build_row(const BugDescriptor& bug,
                    const std::vector<PackageImpactRecord>& records) {
    ImpactRow row;
    row.bug_id = bug.bug_id;
    row.tool_family = bug.tool_family;
    row.severity = bug.severity;
    row.precision = bug.precision;

    long long test_diffs = 0;
    bool stage3_applicable = false;
    std::optional<std::string> rating;

    for (const auto& rec : records) {
        if (rec.bug_id != bug.bug_id)
            throw ValidationError("record for package \"" + rec.package +
                                  "\" belongs to bug " + rec.bug_id + ", not " +
                                  bug.bug_id);
        if (!rec.builds_ok) continue;
        ++row.builds_ok;
        if (rec.reached >= 1) ++row.reached_pkgs;
        if (rec.triggered >= 1) ++row.triggered_pkgs;
        if (rec.any_diff) {
            ++row.diff_pkgs;
            stage3_applicable = true;
            if (rec.symbols_available)
                row.diff_functions += rec.diff_functions;
            else
                ++row.symbol_excluded_pkgs;
        }
        if (rec.divergence == Divergence::divergent) ++test_diffs;
        if (rec.manual_rating &&
            (!rating || rating_rank(*rec.manual_rating) > rating_rank(*rating)))
            rating = rec.manual_rating;
    }
    if (stage3_applicable) row.test_diffs = test_diffs;
    row.manual_rating = rating;

    if (row.diff_pkgs > row.triggered_pkgs) {
        std::string note = "bug " + row.bug_id + ": diff_pkgs (" +
                           std::to_string(row.diff_pkgs) + ") > triggered_pkgs (" +
                           std::to_string(row.triggered_pkgs) + ")";
        if (bug.precision == Precision::precise)
            throw ValidationError(note + " for a precise bug");
        row.soft_anomalies.push_back(note);
    }
    validate_row(row);
    return row;
}

std::string function_fraction(long long diff_functions,
                              std::optional<long long> total_functions) {
    if (!total_functions) return "-";
    if (*total_functions <= 0) throw ConfigError("function total must be positive");
    if (diff_functions == 0) return "0%";
    long long total = *total_functions;
    if (diff_functions * 1000 < total) return "<0.1%";
    // Permille, rounded half away from zero, printed as one decimal of percent.
    long long permille = (2000 * diff_functions + total) / (2 * total);
    return std::to_string(permille / 10) + "." + std::to_string(permille % 10) + "%";
}

std::string render_percent(long long numerator, long long denominator) {
    if (denominator <= 0) return "-";
    if (numerator == 0) return "0%";
    if (numerator * 1000 < denominator) return "<0.1%";
    long long whole = (200 * numerator + denominator) / (2 * denominator);
    if (whole == 0) {
        long long permille = (2000 * numerator + denominator) / (2 * denominator);
        return std::to_string(permille / 10) + "." + std::to_string(permille % 10) + "%";
    }
    return std::to_string(whole) + "%";
}

namespace {

std::string group_value(const ImpactRow& row, GroupKey key) {
    switch (key) {
        case GroupKey::bug: return row.bug_id;
        case GroupKey::tool: return to_string(row.tool_family);
        case GroupKey::severity: return to_string(row.severity);
        case GroupKey::all: return "ALL";
    }
    return "ALL";
}

std::vector<std::string> canonical_groups(const std::vector<ImpactRow>& rows, GroupKey key) {
    std::vector<std::string> order;
    switch (key) {
        case GroupKey::tool:
            order = {"csmith", "emi", "orange", "yarpgen", "alive", "user"};
            break;
        case GroupKey::severity:
            order = {"enhancement", "normal", "release_blocker"};
            break;
        case GroupKey::all:
            return {"ALL"};
        case GroupKey::bug: {
            for (const auto& r : rows)
                if (std::find(order.begin(), order.end(), r.bug_id) == order.end())
                    order.push_back(r.bug_id);
            std::sort(order.begin(), order.end());
            return order;
        }
    }
    std::vector<std::string> present;
    for (const auto& g : order) {
        for (const auto& r : rows) {
            if (group_value(r, key) == g) {
                present.push_back(g);
                break;
            }
        }
    }
    return present;
}

AggregateRow aggregate_group(const std::vector<const ImpactRow*>& members, GroupKey key,
                             const std::string& group, long long total_functions) {
    AggregateRow agg;
    agg.key = key;
    agg.group = group;
    agg.bugs = (long long)members.size();
    bool any_test_diffs = false;
    long long test_diffs = 0;
    for (const ImpactRow* row : members) {
        validate_row(*row);
        agg.builds_ok += row->builds_ok;
        agg.reached_pkgs += row->reached_pkgs;
        agg.triggered_pkgs += row->triggered_pkgs;
        agg.diff_pkgs += row->diff_pkgs;
        agg.symbol_excluded_pkgs += row->symbol_excluded_pkgs;
        if (row->diff_pkgs > 0) agg.diff_functions += row->diff_functions;
        if (row->test_diffs) {
            any_test_diffs = true;
            test_diffs += *row->test_diffs;
        }
        if (row->reached_pkgs >= 1) ++agg.bugs_reached;
        if (row->triggered_pkgs >= 1) {
            ++agg.bugs_triggered;
            if (row->precision == Precision::precise) ++agg.bugs_triggered_precise;
        }
        if (row->diff_pkgs >= 1) ++agg.bugs_with_diffs;
        if (row->test_diffs && *row->test_diffs >= 1) ++agg.bugs_with_test_diffs;
    }
    if (any_test_diffs) agg.test_diffs = test_diffs;

    agg.reached_pct = render_percent(agg.reached_pkgs, agg.builds_ok);
    agg.triggered_pct = render_percent(agg.triggered_pkgs, agg.builds_ok);
    agg.diff_pkgs_pct = render_percent(agg.diff_pkgs, agg.builds_ok);
    agg.test_diffs_pct =
        agg.test_diffs ? render_percent(*agg.test_diffs, agg.builds_ok) : "-";
    // Each member row with diffs represents one compilation of the whole
    // corpus, so the fraction denominator scales with that count.
    agg.diff_function_fraction =
        agg.bugs_with_diffs > 0
            ? function_fraction(agg.diff_functions, total_functions * agg.bugs_with_diffs)
            : "-";
    return agg;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<ImpactRow>& rows, GroupKey key,
                                    long long total_functions) {
    std::vector<AggregateRow> out;
    for (const auto& group : canonical_groups(rows, key)) {
        std::vector<const ImpactRow*> members;
        for (const auto& r : rows)
            if (key == GroupKey::all || group_value(r, key) == group) members.push_back(&r);
        if (members.empty()) continue;
        out.push_back(aggregate_group(members, key, group, total_functions));
    }
    return out;
}

namespace {

std::string row_functions_cell(const ImpactRow& row, long long total_functions) {
    if (row.diff_pkgs == 0) return "-";
    std::string cell = function_fraction(row.diff_functions, total_functions) + " [" +
                       std::to_string(row.diff_functions) + "]";
    if (row.symbol_excluded_pkgs > 0)
        cell += " (" + std::to_string(row.symbol_excluded_pkgs) + " pkgs excluded)";
    return cell;
}

std::string opt_to_string(const std::optional<long long>& v) {
    return v ? std::to_string(*v) : "-";
}

std::string human_severity(Severity s) {
    std::string t = to_string(s);
    std::replace(t.begin(), t.end(), '_', ' ');
    return t;
}

std::string render_markdown(const ImpactTable& table) {
    std::ostringstream out;
    if (!table.rows.empty()) {
        out << "| bug | severity | builds | reached | triggered | precise | diff pkgs "
               "| diff functions | test diffs | manual |\n";
        out << "|---|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& row : table.rows) {
            out << "| " << row.bug_id << " | " << human_severity(row.severity) << " | "
                << row.builds_ok << " | " << row.reached_pkgs << " | "
                << row.triggered_pkgs << " | "
                << (row.precision == Precision::precise ? "yes" : "no") << " | "
                << row.diff_pkgs << " | " << row_functions_cell(row, table.total_functions)
                << " | " << opt_to_string(row.test_diffs) << " | "
                << (row.manual_rating ? *row.manual_rating : "-") << " |\n";
        }
        if (!table.aggregates.empty()) out << "\n";
    }
    if (!table.aggregates.empty()) {
        out << "| group | bugs | builds | reached | triggered | diff pkgs "
               "| diff functions | test diffs | bugs reached | bugs triggered "
               "| precise triggered | bugs w/ diffs | bugs w/ test diffs |\n";
        out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& agg : table.aggregates) {
            std::string functions_cell =
                agg.diff_function_fraction + " [" + std::to_string(agg.diff_functions) + "]";
            if (agg.symbol_excluded_pkgs > 0)
                functions_cell +=
                    " (" + std::to_string(agg.symbol_excluded_pkgs) + " pkgs excluded)";
            out << "| " << agg.group << " | " << agg.bugs << " | " << agg.builds_ok
                << " | " << agg.reached_pkgs << " (" << agg.reached_pct << ") | "
                << agg.triggered_pkgs << " (" << agg.triggered_pct << ") | "
                << agg.diff_pkgs << " (" << agg.diff_pkgs_pct << ") | "
                << functions_cell << " | "
                << opt_to_string(agg.test_diffs) << " (" << agg.test_diffs_pct << ") | "
                << agg.bugs_reached << " | " << agg.bugs_triggered << " | ("
                << agg.bugs_triggered_precise << ") | " << agg.bugs_with_diffs << " | "
                << agg.bugs_with_test_diffs << " |\n";
        }
    }
    return out.str();
}

std::string render_csv(const ImpactTable& table) {
    std::ostringstream out;
    if (!table.rows.empty()) {
        out << "bug_id,severity,builds_ok,reached,triggered,precision,diff_pkgs,"
               "diff_functions,diff_fraction,test_diffs,manual_rating\n";
        for (const auto& row : table.rows) {
            std::string functions = "-", fraction = "-";
            if (row.diff_pkgs > 0) {
                functions = std::to_string(row.diff_functions);
                fraction = function_fraction(row.diff_functions, table.total_functions);
            }
            out << row.bug_id << "," << to_string(row.severity) << "," << row.builds_ok
                << "," << row.reached_pkgs << "," << row.triggered_pkgs << ","
                << to_string(row.precision) << "," << row.diff_pkgs << "," << functions
                << "," << fraction << "," << opt_to_string(row.test_diffs) << ","
                << (row.manual_rating ? *row.manual_rating : "-") << "\n";
        }
        return out.str();
    }
    out << "group,bugs,builds_ok,reached,reached_pct,triggered,triggered_pct,"
           "precise_triggered,diff_pkgs,diff_pkgs_pct,diff_functions,diff_fraction,"
           "test_diffs,test_diffs_pct\n";
    for (const auto& agg : table.aggregates) {
        out << agg.group << "," << agg.bugs << "," << agg.builds_ok << ","
            << agg.reached_pkgs << "," << agg.reached_pct << "," << agg.triggered_pkgs
            << "," << agg.triggered_pct << "," << agg.bugs_triggered_precise << ","
            << agg.diff_pkgs << "," << agg.diff_pkgs_pct << "," << agg.diff_functions
            << "," << agg.diff_function_fraction << "," << opt_to_string(agg.test_diffs)
            << "," << agg.test_diffs_pct << "\n";
    }
    return out.str();
}

}  // namespace

void verify_reconciliation(const std::vector<ImpactRow>& rows,
                           const std::vector<AggregateRow>& aggregates,
                           long long total_functions) {
    if (rows.empty()) return;
    for (const auto& agg : aggregates) {
        std::vector<const ImpactRow*> members;
        for (const auto& r : rows)
            if (agg.key == GroupKey::all || group_value(r, agg.key) == agg.group)
                members.push_back(&r);
        if (members.empty()) continue;
        AggregateRow fresh = aggregate_group(members, agg.key, agg.group, total_functions);
        bool same = fresh.bugs == agg.bugs && fresh.builds_ok == agg.builds_ok &&
                    fresh.reached_pkgs == agg.reached_pkgs &&
                    fresh.triggered_pkgs == agg.triggered_pkgs &&
                    fresh.diff_pkgs == agg.diff_pkgs &&
                    fresh.diff_functions == agg.diff_functions &&
                    fresh.test_diffs == agg.test_diffs;
        if (!same)
            throw ValidationError("aggregate row \"" + agg.group +
                                  "\" does not reconcile with its member rows");
    }
}

std::string render(const ImpactTable& table, TableFormat format) {
    verify_reconciliation(table.rows, table.aggregates, table.total_functions);
    return format == TableFormat::markdown ? render_markdown(table) : render_csv(table);
}

std::optional<long long> recompute_function_total(
    const std::vector<BinaryDiffReport>& reports) {
    bool any = false;
    long long total = 0;
    for (const auto& r : reports) {
        if (r.functions_total_a) {
            any = true;
            total += *r.functions_total_a;
        }
    }
    if (!any) return std::nullopt;
    return total;
}

}  // namespace impact
