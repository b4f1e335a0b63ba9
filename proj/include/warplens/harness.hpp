// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/disassembly.hpp"
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace warplens::harness
{
namespace fs = std::filesystem;

enum class Role : std::uint8_t
{
    Buggy,
    Oracle,
};

/// Which number a timed run contributes: process wall-clock, or the value a
/// runtime reports on a `@warp-lens pseudo-time <n>` stdout line.
enum class TimingSource : std::uint8_t
{
    Wall,
    Reported,
};

struct RuntimeSpec
{
    std::string name;
    Role role = Role::Buggy;
    std::string invoke;  ///< command template containing `{module}` exactly once
    std::string dump;    ///< command template for machine-code dumps; empty when unsupported
    std::chrono::duration<double> timeout{60.0};
    std::map<std::string, std::string> env;
    TimingSource timing = TimingSource::Wall;
    /// Exit statuses that mean "the program trapped" rather than a runtime failure.
    std::set<int> trap_exit_codes;

    /// Throws Error{ConfigError} when the invariants do not hold.
    void check() const;
    /// Stable content hash over every field that can influence a measurement.
    std::string fingerprint() const;
};

/// Expands `{module}` in `tmpl` and splits it into argv.
std::vector<std::string> expand_template(const std::string& tmpl, const fs::path& module);

/// One process-level execution as seen by the harness.
struct RunRecord
{
    int exit_status = 0;
    bool trapped = false;
    bool timed_out = false;
    std::string output;  ///< stdout with harness status lines removed
    double wall_seconds = 0;
    std::optional<double> reported;  ///< pseudo-time, when the runtime printed one
    std::string diagnostics;         ///< trap message or stderr excerpt
};

/// A way to execute modules. Implementations must be safe to call from
/// several threads for untimed runs.
class Runtime
{
public:
    virtual ~Runtime() = default;
    virtual const RuntimeSpec& spec() const = 0;
    /// Throws Error{SpawnFailure} when the runtime itself cannot be started.
    virtual RunRecord run(const fs::path& module, std::chrono::duration<double> timeout) const = 0;
    /// Raw adapter output; throws Error{DumpUnsupported} without a dump adapter.
    virtual std::string dump(const fs::path& module) const = 0;
};

/// Drives an external command through the process boundary.
class ProcessRuntime final : public Runtime
{
public:
    explicit ProcessRuntime(RuntimeSpec spec);
    const RuntimeSpec& spec() const override { return spec_; }
    RunRecord run(const fs::path& module, std::chrono::duration<double> timeout) const override;
    std::string dump(const fs::path& module) const override;

private:
    RuntimeSpec spec_;
};

/// Splits harness status lines out of runtime stdout into `rec`.
void apply_status_lines(const std::string& raw_stdout, RunRecord& rec);

struct TimingSample
{
    std::vector<double> runs;  ///< timed repetitions, warmups excluded
    double median = 0;
    double iqr = 0;  ///< interquartile range, linear interpolation between order statistics
    std::size_t repetitions = 0;
    std::size_t warmups = 0;
    bool unstable = false;     ///< iqr above threshold * median
    double wall_median = 0;    ///< wall-clock median, regardless of TimingSource

    bool operator==(const TimingSample&) const = default;
};

/// Median and interquartile range of `values`.
TimingSample summarize(std::vector<double> values, std::size_t warmups, double instability_threshold);

struct ExecutionOutcome
{
    int exit_status = 0;
    std::string stdout_digest;
    bool trapped = false;
    bool timed_out = false;
    std::string diagnostics;
    std::optional<TimingSample> timing;

    bool ok() const noexcept { return !trapped && !timed_out && exit_status == 0; }
};

/// Single untimed functional run.
ExecutionOutcome run_with_output(const Runtime& rt, const fs::path& module, std::chrono::duration<double> timeout);

struct MeasureOptions
{
    std::size_t repetitions = 5;
    std::size_t warmups = 1;
    double instability_threshold = 0.10;
    std::chrono::duration<double> timeout{60.0};
};

/// Serialized timed runs. Holds the process-wide measurement lock for the
/// whole sample. Throws Error{MeasurementFailure} if any run fails.
TimingSample measure_execution(const Runtime& rt, const fs::path& module, const MeasureOptions& opt);

/// Dumps and parses machine code. Throws DumpUnsupported / DumpParseError.
dis::Disassembly dump_machine_code(const Runtime& rt, const fs::path& module);

/// Process-wide exclusivity for timed runs, with counters tests can inspect.
class MeasurementToken
{
public:
    MeasurementToken();
    ~MeasurementToken();
    MeasurementToken(const MeasurementToken&) = delete;
    MeasurementToken& operator=(const MeasurementToken&) = delete;

    static int max_concurrent() noexcept;
    static std::size_t total_timed_runs() noexcept;
    static void reset_counters() noexcept;
    static void count_timed_run() noexcept;
    /// True on the thread currently holding the token.
    static bool held() noexcept;

private:
    std::unique_lock<std::mutex> lock_;
};
}  // namespace warplens::harness
