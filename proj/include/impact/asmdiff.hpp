#pragma once

#include <impact/builder.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace impact {

struct Instruction {
    std::string address;   // opaque token, ignored in comparison
    std::string opcode;    // mnemonic, prefixes folded in; never empty, no whitespace
    std::string operands;  // raw text, retained for worksheets, ignored in comparison

    bool operator==(const Instruction&) const = default;
};

struct FunctionBody {
    std::string name;
    std::vector<Instruction> instructions;
};

struct DisasmOptions {
    // {binary} is replaced with the shell-quoted artifact path.
    std::string command_template = "objdump -d {binary}";
    // Consecutive leading tokens from this list are folded into the opcode,
    // joined with '.', so "lock incl" compares as one mnemonic "lock.incl".
    std::vector<std::string> known_prefixes = {
        "lock", "rep", "repe", "repz", "repne", "repnz", "bnd",
        "notrack", "data16", "addr32", "cs", "ss", "ds", "es", "fs", "gs"};
    // When set, only these sections are parsed; otherwise every section in
    // the disassembler output (objdump -d already restricts itself to
    // executable sections).
    std::optional<std::set<std::string>> section_filter;
};

// Runs the configured disassembler over the binary and returns its text
// output. The text is cached beside the binary ("<path>.disasm"); a cache hit
// skips the subprocess. Throws on disassembler failure (unrecognized format,
// nonzero exit).
std::string disassemble(const std::filesystem::path& binary_path,
                        const DisasmOptions& options);

// Line-oriented parse of disassembler output into per-function instruction
// lists. Labels whose symbol starts with '.' or ends with "@plt" are
// placeholders synthesized without a usable symbol table and open no
// function. Duplicate names are disambiguated as name#1, name#2, ... by
// occurrence. Data-in-code lines (address but no mnemonic) are skipped.
std::map<std::string, FunctionBody> parse_functions(const std::string& disassembly,
                                                    const DisasmOptions& options = {});

// The ordered opcode sequence: addresses, registers, immediates and memory
// operands dropped.
std::vector<std::string> normalize(const FunctionBody& body);

struct FunctionDiff {
    long long functions_total_a = 0;
    long long functions_total_b = 0;
    long long matched = 0;
    std::vector<std::string> differing;  // matched names with unequal opcode sequences
    std::vector<std::string> added;      // present only in b
    std::vector<std::string> removed;    // present only in a
};

FunctionDiff diff_functions(const std::map<std::string, FunctionBody>& a,
                            const std::map<std::string, FunctionBody>& b);

struct BinaryDiffReport {
    std::string rel_path;
    std::filesystem::path path_a;
    std::filesystem::path path_b;
    bool bitwise_identical = false;
    bool symbols_available = false;
    // Absent when bitwise identical (never disassembled) or symbols missing.
    std::optional<long long> functions_total_a;
    std::optional<long long> functions_total_b;
    std::optional<long long> matched;
    std::vector<std::string> differing;
    std::vector<std::string> added;
    std::vector<std::string> removed;
    std::string error;  // per-artifact failure, recorded instead of thrown
};

bool compare_bitwise(const std::filesystem::path& a, const std::filesystem::path& b);

struct ArtifactSetDiff {
    std::vector<BinaryDiffReport> reports;          // one per paired rel_path
    std::vector<std::string> structural_anomalies;  // rel paths on one side only
};

// Pairs artifacts by relative path; bitwise-identical pairs short-circuit
// (no disassembly). `disassemble_differing` turns the per-function analysis
// off while keeping the bitwise verdicts (stage gating for precise bugs with
// no triggered fault).
ArtifactSetDiff diff_artifact_sets(const BuildOutcome& out_a, const BuildOutcome& out_b,
                                   const DisasmOptions& options,
                                   bool disassemble_differing = true);

}  // namespace impact
