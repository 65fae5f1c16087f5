#pragma once

#include <impact/corpus.hpp>
#include <impact/fsutil.hpp>
#include <impact/toolchain.hpp>

#include <atomic>
#include <filesystem>
#include <string>

#include <sys/stat.h>
#include <unistd.h>

namespace testutil {

namespace fs = std::filesystem;

inline std::atomic<uint64_t> g_tmp_counter{0};

// Unique scratch directory, removed on destruction.
struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("impact-" + tag + "-" + std::to_string(getpid()) + "-" +
                std::to_string(g_tmp_counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    impact::write_file_atomic(p, content);
}

inline fs::path write_script(const fs::path& p, const std::string& body) {
    write_file(p, "#!/bin/sh\n" + body);
    chmod(p.c_str(), 0755);
    return p;
}

// --- shim compilers -------------------------------------------------------
//
// All shims wrap the system compiler. Scripts receive the usual compiler
// argument list because toy build commands invoke "$CC" directly.

inline fs::path make_plain_cc(const fs::path& dir, const std::string& name) {
    return write_script(dir / name, "exec cc \"$@\"\n");
}

// Prints the reached marker once per C translation unit on the command line
// and the triggered marker for units whose name contains `trigger_substr`
// (empty = never), then compiles for real.
inline fs::path make_marker_cc(const fs::path& dir, const std::string& name,
                               const std::string& reached_marker,
                               const std::string& triggered_marker,
                               const std::string& trigger_substr) {
    std::string body = "for a in \"$@\"; do\n"
                       "  case \"$a\" in\n"
                       "    *.c)\n"
                       "      echo \"" + reached_marker + ": $a\" >&2\n";
    if (!trigger_substr.empty()) {
        body += "      case \"$a\" in\n"
                "        *" + trigger_substr + "*) echo \"" + triggered_marker +
                ": $a\" >&2;;\n"
                "      esac\n";
    }
    body += "      ;;\n"
            "  esac\n"
            "done\n"
            "exec cc \"$@\"\n";
    return write_script(dir / name, body);
}

// Rewrites `sed_from` to `sed_to` in translation units whose name contains
// `file_substr` before compiling, planting a deterministic one-mnemonic
// change in the functions that use the edited expression.
inline fs::path make_patching_cc(const fs::path& dir, const std::string& name,
                                 const std::string& file_substr,
                                 const std::string& sed_from, const std::string& sed_to) {
    std::string body = "for a in \"$@\"; do\n"
                       "  case \"$a\" in\n"
                       "    *" + file_substr + "*) sed -i 's/" + sed_from + "/" +
                       sed_to + "/' \"$a\";;\n"
                       "  esac\n"
                       "done\n"
                       "exec cc \"$@\"\n";
    return write_script(dir / name, body);
}

inline impact::CompilerVariant make_variant(const std::string& id,
                                            impact::VariantRole role,
                                            const fs::path& cc) {
    impact::CompilerVariant v;
    v.variant_id = id;
    v.role = role;
    v.c_compiler_path = cc;
    v.cxx_compiler_path = cc;
    return v;
}

// Bug descriptor document pointing at three shim compilers.
inline fs::path write_bug_file(const fs::path& dir, const std::string& bug_id,
                               const std::string& precision, const fs::path& cc_buggy,
                               const fs::path& cc_fixed, const fs::path& cc_wl,
                               const std::string& witness_path = "") {
    std::string witness = witness_path.empty()
                              ? "null"
                              : "\"" + witness_path + "\"";
    write_file(dir / (bug_id + ".json"),
               "{\n"
               "  \"bug_id\": \"" + bug_id + "\",\n"
               "  \"tool_family\": \"csmith\",\n"
               "  \"severity\": \"normal\",\n"
               "  \"precision\": \"" + precision + "\",\n"
               "  \"witness_path\": " + witness + ",\n"
               "  \"variants\": {\n"
               "    \"buggy\": {\"variant_id\": \"" + bug_id + "-buggy\", \"cc\": \"" +
                   cc_buggy.string() + "\"},\n"
               "    \"fixed\": {\"variant_id\": \"" + bug_id + "-fixed\", \"cc\": \"" +
                   cc_fixed.string() + "\"},\n"
               "    \"warning_laden\": {\"variant_id\": \"" + bug_id + "-wl\", \"cc\": \"" +
                   cc_wl.string() + "\"}\n"
               "  }\n"
               "}\n");
    return dir / (bug_id + ".json");
}

// --- toy packages ---------------------------------------------------------

// A library with two functions, a program and a protocol-speaking test
// binary. The patching shim's "a & b" -> "a | b" edit changes exactly one
// mnemonic (and -> or) in mix_bits at -O0 and flips the t_mix test.
inline void make_target_package(const fs::path& src_dir, const std::string& tag) {
    write_file(src_dir / "impl.c",
               "int mix_bits(int a, int b) { return a & b; }\n"
               "int scale_" + tag + "(int a) { return a * 3; }\n");
    write_file(src_dir / "prog.c",
               "#include <stdio.h>\n"
               "int mix_bits(int, int);\n"
               "int scale_" + tag + "(int);\n"
               "int main(void) {\n"
               "    printf(\"%d\\n\", mix_bits(20, 3) + scale_" + tag + "(2));\n"
               "    return 0;\n"
               "}\n");
    write_file(src_dir / "checks.c",
               "#include <stdio.h>\n"
               "int mix_bits(int, int);\n"
               "int scale_" + tag + "(int);\n"
               "int main(void) {\n"
               "    printf(\"TESTPROTO 1\\n\");\n"
               "    printf(\"t_mix %s\\n\", mix_bits(6, 3) == 2 ? \"pass\" : \"fail\");\n"
               "    printf(\"t_scale %s\\n\", scale_" + tag + "(4) == 12 ? \"pass\" : \"fail\");\n"
               "    printf(\"END 2\\n\");\n"
               "    return 0;\n"
               "}\n");
}

inline impact::PackageSpec target_package_spec(const fs::path& src_dir,
                                               const std::string& name) {
    impact::PackageSpec pkg;
    pkg.name = name;
    pkg.version = "1.0";
    pkg.source_path = src_dir;
    pkg.build_cmd = "\"$CC\" -O0 -o prog prog.c impl.c && \"$CC\" -O0 -o checks checks.c impl.c";
    pkg.test_cmd = "./checks";
    pkg.artifact_globs = {"prog"};
    pkg.loc = 2000;
    return pkg;
}

// Single-file package whose build and tests behave identically under every
// compiler variant.
inline void make_quiet_package(const fs::path& src_dir, const std::string& tag) {
    write_file(src_dir / "main.c",
               "#include <stdio.h>\n"
               "int value_" + tag + "(void) { return 7; }\n"
               "int main(void) { printf(\"%d\\n\", value_" + tag + "()); return 0; }\n");
    write_script(src_dir / "tests.sh",
                 "echo \"TESTPROTO 1\"\n"
                 "out=$(./prog)\n"
                 "if [ \"$out\" = \"7\" ]; then echo \"t_value pass\"; else echo \"t_value fail\"; fi\n"
                 "echo \"END 1\"\n");
}

inline impact::PackageSpec quiet_package_spec(const fs::path& src_dir,
                                              const std::string& name) {
    impact::PackageSpec pkg;
    pkg.name = name;
    pkg.version = "1.0";
    pkg.source_path = src_dir;
    pkg.build_cmd = "\"$CC\" -O0 -o prog main.c";
    pkg.test_cmd = "sh ./tests.sh";
    pkg.artifact_globs = {"prog"};
    pkg.loc = 1500;
    return pkg;
}

}  // namespace testutil
