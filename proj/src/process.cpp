// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/process.hpp"
#include "warplens/error.hpp"
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace warplens
{
namespace
{
struct Pipe
{
    int fd[2] = {-1, -1};
    Pipe()
    {
        if (::pipe2(fd, O_CLOEXEC) != 0)
            throw Error{Errc::SpawnFailure, std::string{"pipe: "} + std::strerror(errno)};
    }
    ~Pipe()
    {
        close_read();
        close_write();
    }
    void close_read()
    {
        if (fd[0] >= 0)
            ::close(fd[0]);
        fd[0] = -1;
    }
    void close_write()
    {
        if (fd[1] >= 0)
            ::close(fd[1]);
        fd[1] = -1;
    }
};

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& overrides)
{
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e)
    {
        std::string kv{*e};
        const auto eq = kv.find('=');
        if (eq != std::string::npos)
            env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    for (const auto& [k, v] : overrides)
        env[k] = v;
    std::vector<std::string> out;
    for (const auto& [k, v] : env)
        out.push_back(k + "=" + v);
    return out;
}

std::vector<char*> c_strings(std::vector<std::string>& v)
{
    std::vector<char*> out;
    for (auto& s : v)
        out.push_back(s.data());
    out.push_back(nullptr);
    return out;
}
}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env,
                          std::chrono::duration<double> timeout)
{
    if (argv.empty())
        throw Error{Errc::SpawnFailure, "empty command"};

    Pipe out_pipe;
    Pipe err_pipe;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_adddup2(&actions, out_pipe.fd[1], 1);
    posix_spawn_file_actions_adddup2(&actions, err_pipe.fd[1], 2);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    auto args = argv;
    auto envs = merged_environment(env);
    auto cargs = c_strings(args);
    auto cenv = c_strings(envs);

    const auto start = std::chrono::steady_clock::now();
    pid_t pid = -1;
    const int rc = ::posix_spawnp(&pid, args[0].c_str(), &actions, &attr, cargs.data(), cenv.data());
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0)
        throw Error{Errc::SpawnFailure, "cannot launch '" + argv[0] + "': " + std::strerror(rc)};
    out_pipe.close_write();
    err_pipe.close_write();

    ProcessResult result;
    const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
    pollfd fds[2] = {{out_pipe.fd[0], POLLIN, 0}, {err_pipe.fd[0], POLLIN, 0}};
    int open_fds = 2;
    char buf[65536];
    while (open_fds > 0)
    {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline)
        {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            break;
        }
        const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
        const int n = ::poll(fds, 2, static_cast<int>(std::min<long long>(wait_ms, 1000)));
        if (n < 0)
        {
            if (errno == EINTR)
                continue;
            break;
        }
        for (int i = 0; i < 2; ++i)
        {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR)))
                continue;
            const ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
            if (got > 0)
                (i == 0 ? result.out : result.err).append(buf, static_cast<std::size_t>(got));
            else if (got == 0 || errno != EINTR)
            {
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }

    int status = 0;
    while (true)
    {
        if (!result.timed_out)
        {
            const pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid)
                break;
            if (w < 0 && errno != EINTR)
                break;
            if (std::chrono::steady_clock::now() >= deadline)
            {
                result.timed_out = true;
                ::kill(-pid, SIGKILL);
                continue;
            }
            ::usleep(1000);
            continue;
        }
        if (::waitpid(pid, &status, 0) == pid || errno != EINTR)
            break;
    }
    // Reap stragglers left in the group by the runtime.
    ::kill(-pid, SIGKILL);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!result.timed_out)
    {
        if (WIFEXITED(status))
            result.exit_code = WEXITSTATUS(status);
        else if (WIFSIGNALED(status))
            result.signal = WTERMSIG(status);
    }
    return result;
}

std::vector<std::string> split_command(const std::string& text)
{
    std::vector<std::string> words;
    std::string cur;
    bool in_word = false;
    char quote = 0;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const char c = text[i];
        if (quote == '\'')
        {
            if (c == '\'')
                quote = 0;
            else
                cur += c;
            continue;
        }
        if (c == '\\' && i + 1 < text.size())
        {
            cur += text[++i];
            in_word = true;
            continue;
        }
        if (quote == '"')
        {
            if (c == '"')
                quote = 0;
            else
                cur += c;
            continue;
        }
        if (c == '\'' || c == '"')
        {
            quote = c;
            in_word = true;
        }
        else if (c == ' ' || c == '\t' || c == '\n')
        {
            if (in_word)
                words.push_back(std::move(cur));
            cur.clear();
            in_word = false;
        }
        else
        {
            cur += c;
            in_word = true;
        }
    }
    if (quote != 0)
        throw Error{Errc::ConfigError, "unterminated quote in command: " + text};
    if (in_word)
        words.push_back(std::move(cur));
    return words;
}
}  // namespace warplens
