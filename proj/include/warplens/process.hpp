// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

namespace warplens
{
struct ProcessResult
{
    int exit_code = -1;   ///< valid when !signaled && !timed_out
    int signal = 0;       ///< terminating signal, 0 if none
    bool timed_out = false;
    std::string out;
    std::string err;
    double seconds = 0;   ///< wall time from spawn to reap
};

/// Runs argv[0] (PATH lookup) with the current environment plus `env`
/// overrides, capturing stdout and stderr. On timeout the whole process group
/// is killed. Throws Error{SpawnFailure} when the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env,
                          std::chrono::duration<double> timeout);

/// Splits a command template into words, honoring single and double quotes
/// and backslash escapes outside single quotes.
std::vector<std::string> split_command(const std::string& text);
}  // namespace warplens
