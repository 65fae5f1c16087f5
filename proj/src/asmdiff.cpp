#include <impact/asmdiff.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>
#include <impact/subprocess.hpp>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>

namespace fs = std::filesystem;

namespace impact {

namespace {

const std::string kSectionPrefix = "Disassembly of section ";

bool is_hex(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c); });
}

bool is_byte_pair(const std::string& s) {
    return s.size() == 2 && std::isxdigit((unsigned char)s[0]) &&
           std::isxdigit((unsigned char)s[1]);
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace((unsigned char)s[i])) ++i;
        size_t start = i;
        while (i < s.size() && !std::isspace((unsigned char)s[i])) ++i;
        if (i > start) tokens.emplace_back(s, start, i - start);
    }
    return tokens;
}

bool is_placeholder_symbol(const std::string& name) {
    if (!name.empty() && name.front() == '.') return true;
    static const std::string plt = "@plt";
    return name.size() >= plt.size() &&
           name.compare(name.size() - plt.size(), plt.size(), plt) == 0;
}

}  // namespace

std::string disassemble(const fs::path& binary_path, const DisasmOptions& options) {
    if (!fs::exists(binary_path))
        throw IoError("binary does not exist: " + binary_path.string());

    fs::path cache = binary_path;
    cache += ".disasm";
    if (fs::exists(cache)) return read_file(cache);

    std::string cmd = options.command_template;
    size_t pos = cmd.find("{binary}");
    if (pos == std::string::npos)
        throw ConfigError("disassembler command template lacks {binary}: " + cmd);
    cmd.replace(pos, 8, shell_quote(fs::absolute(binary_path).string()));

    CommandSpec spec;
    spec.shell_command = cmd;
    spec.timeout = std::chrono::minutes(10);
    std::string output;
    CommandResult r = run_command_capture(spec, output);
    if (!r.ok())
        throw Error("disassembler failed on " + binary_path.string() +
                    (r.timed_out ? " (timeout)" : " (exit " + std::to_string(r.exit_code) + ")"));

    write_file_atomic(cache, output);
    return output;
}

std::map<std::string, FunctionBody> parse_functions(const std::string& disassembly,
                                                    const DisasmOptions& options) {
    struct RawFunction {
        std::string name;
        std::vector<Instruction> instructions;
    };
    std::vector<RawFunction> functions;
    RawFunction* current = nullptr;
    bool section_kept = true;

    const auto& prefixes = options.known_prefixes;
    auto is_prefix = [&](const std::string& tok) {
        return std::find(prefixes.begin(), prefixes.end(), tok) != prefixes.end();
    };

    size_t line_no = 0;
    for (const auto& line : split_lines(disassembly)) {
        ++line_no;
        if (line.empty()) continue;

        if (line.rfind(kSectionPrefix, 0) == 0) {
            std::string name = line.substr(kSectionPrefix.size());
            if (!name.empty() && name.back() == ':') name.pop_back();
            section_kept = !options.section_filter || options.section_filter->count(name) > 0;
            current = nullptr;
            continue;
        }

        // Function label: <hexaddr> <<symbol>>:
        if (!std::isspace((unsigned char)line[0])) {
            size_t sp = line.find(' ');
            if (sp != std::string::npos && is_hex(line.substr(0, sp))) {
                size_t lt = line.find('<', sp);
                size_t gt = line.rfind(">:");
                if (lt != std::string::npos && gt != std::string::npos && gt > lt) {
                    std::string symbol = line.substr(lt + 1, gt - lt - 1);
                    if (symbol.empty())
                        throw ParseError("empty function label at line " +
                                         std::to_string(line_no));
                    current = nullptr;
                    if (section_kept && !is_placeholder_symbol(symbol)) {
                        functions.push_back({symbol, {}});
                        current = &functions.back();
                    }
                    continue;
                }
            }
        }

        // Instruction line: <hexaddr>: [byte pairs] <mnemonic> [operands]
        size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || first >= colon) continue;
        std::string addr = line.substr(first, colon - first);
        if (!is_hex(addr)) continue;
        if (!current || !section_kept) continue;

        auto tokens = tokenize(line.substr(colon + 1));
        size_t idx = 0;
        while (idx < tokens.size() && is_byte_pair(tokens[idx])) ++idx;
        if (idx >= tokens.size()) continue;  // pure byte continuation, no mnemonic

        Instruction insn;
        insn.address = addr;
        insn.opcode = tokens[idx++];
        // Fold consecutive prefixes: "lock incl" -> "lock.incl".
        std::string last = insn.opcode;
        while (is_prefix(last) && idx < tokens.size()) {
            last = tokens[idx++];
            insn.opcode += "." + last;
        }
        std::string operands;
        for (size_t i = idx; i < tokens.size(); ++i) {
            if (!operands.empty()) operands += " ";
            operands += tokens[i];
        }
        insn.operands = operands;
        current->instructions.push_back(std::move(insn));
    }

    // Disambiguate duplicate names by occurrence index.
    std::map<std::string, int> name_count;
    for (const auto& f : functions) ++name_count[f.name];
    std::map<std::string, int> seen;
    std::map<std::string, FunctionBody> out;
    for (auto& f : functions) {
        std::string name = f.name;
        if (name_count[name] > 1)
            name += "#" + std::to_string(++seen[f.name]);
        out[name] = FunctionBody{name, std::move(f.instructions)};
    }
    return out;
}

std::vector<std::string> normalize(const FunctionBody& body) {
    std::vector<std::string> opcodes;
    opcodes.reserve(body.instructions.size());
    for (const auto& insn : body.instructions) opcodes.push_back(insn.opcode);
    return opcodes;
}

FunctionDiff diff_functions(const std::map<std::string, FunctionBody>& a,
                            const std::map<std::string, FunctionBody>& b) {
    FunctionDiff diff;
    diff.functions_total_a = (long long)a.size();
    diff.functions_total_b = (long long)b.size();
    for (const auto& [name, body_a] : a) {
        auto it = b.find(name);
        if (it == b.end()) {
            diff.removed.push_back(name);
            continue;
        }
        ++diff.matched;
        if (normalize(body_a) != normalize(it->second)) diff.differing.push_back(name);
    }
    for (const auto& [name, body_b] : b) {
        if (!a.count(name)) diff.added.push_back(name);
    }
    return diff;
}

bool compare_bitwise(const fs::path& a, const fs::path& b) {
    if (!fs::exists(a) || !fs::exists(b))
        throw IoError("bitwise compare: missing file " +
                      (fs::exists(a) ? b.string() : a.string()));
    if (fs::file_size(a) != fs::file_size(b)) return false;
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) throw IoError("bitwise compare: open failure");
    char buf_a[65536], buf_b[65536];
    for (;;) {
        fa.read(buf_a, sizeof buf_a);
        fb.read(buf_b, sizeof buf_b);
        std::streamsize got_a = fa.gcount(), got_b = fb.gcount();
        if (got_a != got_b) return false;
        if (got_a == 0) break;
        if (std::memcmp(buf_a, buf_b, size_t(got_a)) != 0) return false;
    }
    return true;
}

ArtifactSetDiff diff_artifact_sets(const BuildOutcome& out_a, const BuildOutcome& out_b,
                                   const DisasmOptions& options,
                                   bool disassemble_differing) {
    ArtifactSetDiff result;

    std::map<std::string, const ArtifactRecord*> by_path_a, by_path_b;
    for (const auto& a : out_a.artifacts) by_path_a[a.rel_path] = &a;
    for (const auto& b : out_b.artifacts) by_path_b[b.rel_path] = &b;

    for (const auto& [rel, rec] : by_path_a) {
        if (!by_path_b.count(rel))
            result.structural_anomalies.push_back("only in " + out_a.variant_id + ": " + rel);
    }
    for (const auto& [rel, rec] : by_path_b) {
        if (!by_path_a.count(rel))
            result.structural_anomalies.push_back("only in " + out_b.variant_id + ": " + rel);
    }

    for (const auto& [rel, rec_a] : by_path_a) {
        auto it = by_path_b.find(rel);
        if (it == by_path_b.end()) continue;

        BinaryDiffReport report;
        report.rel_path = rel;
        report.path_a = out_a.build_dir / rel;
        report.path_b = out_b.build_dir / rel;
        try {
            report.bitwise_identical = rec_a->digest == it->second->digest &&
                                       compare_bitwise(report.path_a, report.path_b);
            if (!report.bitwise_identical && disassemble_differing) {
                auto funcs_a = parse_functions(disassemble(report.path_a, options), options);
                auto funcs_b = parse_functions(disassemble(report.path_b, options), options);
                report.symbols_available = !funcs_a.empty() && !funcs_b.empty();
                if (report.symbols_available) {
                    FunctionDiff diff = diff_functions(funcs_a, funcs_b);
                    report.functions_total_a = diff.functions_total_a;
                    report.functions_total_b = diff.functions_total_b;
                    report.matched = diff.matched;
                    report.differing = std::move(diff.differing);
                    report.added = std::move(diff.added);
                    report.removed = std::move(diff.removed);
                }
            }
        } catch (const Error& e) {
            report.error = e.what();
            report.symbols_available = false;
        }
        result.reports.push_back(std::move(report));
    }
    return result;
}

}  // namespace impact
