#include <impact/subprocess.hpp>

#include <impact/errors.hpp>
#include <impact/fsutil.hpp>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace impact {

namespace {

// Runs between fork and exec: async-signal-safe calls only, no allocation
// (other threads may hold the allocator lock at fork time).
[[noreturn]] void child_exec(const CommandSpec& spec, char* const* envp) {
    // New process group so a timeout can kill the whole command tree.
    setpgid(0, 0);

    if (!spec.working_dir.empty()) {
        if (chdir(spec.working_dir.c_str()) != 0) _exit(127);
    }

    if (!spec.stdout_path.empty()) {
        int out_fd = open(spec.stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (out_fd < 0) _exit(127);
        int err_fd = out_fd;
        if (!spec.stderr_path.empty()) {
            err_fd = open(spec.stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
            if (err_fd < 0) _exit(127);
        }
        dup2(out_fd, STDOUT_FILENO);
        dup2(err_fd, STDERR_FILENO);
        if (out_fd > 2) close(out_fd);
        if (err_fd > 2 && err_fd != out_fd) close(err_fd);
    }

    const char* argv[] = {"sh", "-c", spec.shell_command.c_str(), nullptr};
    execve("/bin/sh", const_cast<char* const*>(argv), envp);
    _exit(127);
}

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> out;
    for (char** e = environ; e && *e; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        std::string name = eq == std::string::npos ? entry : entry.substr(0, eq);
        if (overrides.count(name) == 0) out.push_back(std::move(entry));
    }
    for (const auto& [k, v] : overrides) out.push_back(k + "=" + v);
    return out;
}

}  // namespace

CommandResult run_command(const CommandSpec& spec) {
    // Capture paths must not be re-resolved against the child's working
    // directory after its chdir.
    CommandSpec resolved = spec;
    if (!resolved.stdout_path.empty())
        resolved.stdout_path = std::filesystem::absolute(resolved.stdout_path);
    if (!resolved.stderr_path.empty())
        resolved.stderr_path = std::filesystem::absolute(resolved.stderr_path);

    auto env_strings = merged_environment(resolved.env);
    std::vector<char*> envp;
    envp.reserve(env_strings.size() + 1);
    for (const auto& s : env_strings) envp.push_back(const_cast<char*>(s.c_str()));
    envp.push_back(nullptr);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw IoError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) child_exec(resolved, envp.data());

    // Mirror the child's setpgid to avoid a race before exec.
    setpgid(pid, pid);

    CommandResult result;
    int status = 0;
    for (;;) {
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0 && errno != EINTR)
            throw IoError(std::string("waitpid failed: ") + std::strerror(errno));
        auto elapsed = std::chrono::steady_clock::now() - start;
        if (spec.timeout.count() > 0 && elapsed >= spec.timeout) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

    auto elapsed = std::chrono::steady_clock::now() - start;
    result.wall_seconds = std::chrono::duration<double>(elapsed).count();
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

CommandResult run_command_capture(const CommandSpec& spec, std::string& output) {
    CommandSpec s = spec;
    auto tmp = std::filesystem::temp_directory_path() /
               ("impact-capture-" + std::to_string(getpid()) + "-" +
                std::to_string(reinterpret_cast<uintptr_t>(&output)));
    s.stdout_path = tmp;
    s.stderr_path.clear();
    CommandResult r = run_command(s);
    output = read_file(tmp);
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    return r;
}

std::string shell_quote(const std::string& arg) {
    std::string out = "'";
    for (char c : arg) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

}  // namespace impact
