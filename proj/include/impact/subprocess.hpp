#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

namespace impact {

// One shell command executed via /bin/sh -c in its own process group.
struct CommandSpec {
    std::string shell_command;
    std::filesystem::path working_dir;  // empty = inherit
    std::map<std::string, std::string> env;  // overlaid on the parent environment
    // Combined stdout+stderr capture when stderr_path is empty; both empty =
    // inherit the parent's streams.
    std::filesystem::path stdout_path;
    std::filesystem::path stderr_path;
    std::chrono::milliseconds timeout{0};  // 0 = unlimited
};

struct CommandResult {
    int exit_code = -1;   // 128+signal when terminated by a signal
    bool timed_out = false;
    double wall_seconds = 0.0;

    bool ok() const { return !timed_out && exit_code == 0; }
};

// Runs to completion (or timeout; the whole process group is then killed).
CommandResult run_command(const CommandSpec& spec);

// Convenience: capture combined output into a string via a scratch file.
CommandResult run_command_capture(const CommandSpec& spec, std::string& output);

// Shell-quotes a single argument (POSIX single-quote escaping).
std::string shell_quote(const std::string& arg);

}  // namespace impact
