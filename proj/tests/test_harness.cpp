// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "warplens/error.hpp"
#include "warplens/harness.hpp"
#include "warplens/process.hpp"
#include <atomic>
#include <fstream>
#include <gtest/gtest.h>
#include <thread>

using namespace warplens;
using namespace warplens::harness;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace
{
fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("warplens_harness_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

fs::path script(const std::string& name, const std::string& body)
{
    const auto p = scratch(name);
    std::ofstream{p} << "#!/bin/sh\n" << body << "\n";
    fs::permissions(p, fs::perms::owner_all);
    return p;
}

RuntimeSpec spec_for(const fs::path& exe)
{
    RuntimeSpec s;
    s.name = exe.filename().string();
    s.invoke = exe.string() + " {module}";
    return s;
}

/// Records how many runs overlap.
class CountingRuntime final : public Runtime
{
public:
    explicit CountingRuntime(double value) : value_{value}
    {
        spec_.name = "counting";
        spec_.invoke = "counting {module}";
        spec_.timing = TimingSource::Reported;
    }
    const RuntimeSpec& spec() const override { return spec_; }
    RunRecord run(const fs::path&, std::chrono::duration<double>) const override
    {
        const int now = ++active_;
        int prev = peak_.load();
        while (now > prev && !peak_.compare_exchange_weak(prev, now))
        {
        }
        std::this_thread::sleep_for(2ms);
        --active_;
        RunRecord r;
        r.reported = value_;
        r.wall_seconds = 0.002;
        return r;
    }
    std::string dump(const fs::path&) const override { throw Error{Errc::DumpUnsupported, "none"}; }
    int peak() const { return peak_.load(); }

private:
    RuntimeSpec spec_;
    double value_;
    mutable std::atomic<int> active_{0};
    mutable std::atomic<int> peak_{0};
};
}  // namespace

TEST(Process, CapturesOutputAndExitCode)
{
    const auto r = run_process({"sh", "-c", "echo out; echo err >&2; exit 7"}, {}, 10s);
    EXPECT_EQ(r.exit_code, 7);
    EXPECT_EQ(r.out, "out\n");
    EXPECT_EQ(r.err, "err\n");
    EXPECT_FALSE(r.timed_out);
}

TEST(Process, EnvironmentIsPassed)
{
    const auto r = run_process({"sh", "-c", "printf %s \"$WL_PROBE\""}, {{"WL_PROBE", "x y"}}, 10s);
    EXPECT_EQ(r.out, "x y");
}

TEST(Process, TimeoutKillsProcessGroup)
{
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_process({"sh", "-c", "sleep 30 & sleep 30"}, {}, 0.3s);
    EXPECT_TRUE(r.timed_out);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

TEST(Process, SpawnFailure)
{
    try
    {
        (void)run_process({"/nonexistent/warp-lens-runtime"}, {}, 1s);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::SpawnFailure);
    }
}

TEST(Process, SplitCommandHonoursQuotes)
{
    EXPECT_EQ(split_command("a 'b c' \"d e\" f\\ g"), (std::vector<std::string>{"a", "b c", "d e", "f g"}));
}

TEST(RuntimeSpecTest, PlaceholderRules)
{
    RuntimeSpec s;
    s.name = "x";
    s.invoke = "run";
    EXPECT_THROW(s.check(), Error);
    s.invoke = "run {module} {module}";
    EXPECT_THROW(s.check(), Error);
    s.invoke = "run {module}";
    EXPECT_NO_THROW(s.check());
    s.dump = "dump";
    EXPECT_THROW(s.check(), Error);
}

TEST(RuntimeSpecTest, FingerprintTracksMeasurementFields)
{
    RuntimeSpec a;
    a.name = "x";
    a.invoke = "run {module}";
    auto b = a;
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    b.env["FLAG"] = "1";
    EXPECT_NE(a.fingerprint(), b.fingerprint());
    b = a;
    b.timing = TimingSource::Reported;
    EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(RuntimeSpecTest, TemplateExpansion)
{
    EXPECT_EQ(expand_template("rt --run '{module}' -q", "/tmp/a b.wasm"),
              (std::vector<std::string>{"rt", "--run", "/tmp/a b.wasm", "-q"}));
}

TEST(StatusLines, AreStrippedAndApplied)
{
    RunRecord r;
    apply_status_lines("hello\n@warp-lens pseudo-time 125\n@warp-lens trap unreachable\nbye\n", r);
    EXPECT_EQ(r.output, "hello\nbye\n");
    ASSERT_TRUE(r.reported);
    EXPECT_EQ(*r.reported, 125.0);
    EXPECT_TRUE(r.trapped);
    EXPECT_EQ(r.diagnostics, "unreachable");
    RunRecord t;
    apply_status_lines("@warp-lens timeout\n", t);
    EXPECT_TRUE(t.timed_out);
    RunRecord bad;
    EXPECT_THROW(apply_status_lines("@warp-lens pseudo-time lots\n", bad), Error);
}

TEST(ProcessRuntimeTest, ExitCodesSignalsAndTraps)
{
    auto s = spec_for(script("exit5.sh", "echo result; exit 5"));
    s.trap_exit_codes = {5};
    const auto r = ProcessRuntime{s}.run("m.wasm", 10s);
    EXPECT_TRUE(r.trapped);
    EXPECT_EQ(r.exit_status, 5);
    EXPECT_EQ(r.output, "result\n");

    const auto sig = ProcessRuntime{spec_for(script("segv.sh", "kill -SEGV $$"))}.run("m.wasm", 10s);
    EXPECT_TRUE(sig.trapped);
    EXPECT_EQ(sig.exit_status, 128 + 11);

    const auto slow = ProcessRuntime{spec_for(script("slow.sh", "sleep 30"))}.run("m.wasm", 0.2s);
    EXPECT_TRUE(slow.timed_out);
    EXPECT_FALSE(run_with_output(ProcessRuntime{spec_for(script("slow2.sh", "sleep 30"))}, "m.wasm", 0.2s).ok());
}

TEST(ProcessRuntimeTest, ModulePathReachesRuntime)
{
    const auto rt = ProcessRuntime{spec_for(script("echo.sh", "echo \"$1\""))};
    const auto o = run_with_output(rt, "/some/where/mutant_1_rule2.wasm", 10s);
    EXPECT_TRUE(o.ok());
    EXPECT_EQ(o.stdout_digest, run_with_output(rt, "/some/where/mutant_1_rule2.wasm", 10s).stdout_digest);
    EXPECT_NE(o.stdout_digest, run_with_output(rt, "/else/where.wasm", 10s).stdout_digest);
}

TEST(ProcessRuntimeTest, DumpAdapter)
{
    auto s = spec_for(script("rt.sh", "true"));
    EXPECT_THROW((void)ProcessRuntime{s}.dump("m.wasm"), Error);
    s.dump = script("dump.sh", "printf 'func0:\\n  0:\\t90 \\tnop\\n'").string() + " {module}";
    const auto d = dump_machine_code(ProcessRuntime{s}, "m.wasm");
    ASSERT_EQ(d.functions.size(), 1u);
    EXPECT_EQ(d.functions[0].instructions.at(0).mnemonic, "nop");
    s.dump = script("dumpfail.sh", "exit 1").string() + " {module}";
    EXPECT_THROW((void)ProcessRuntime{s}.dump("m.wasm"), Error);
}

TEST(Timing, MedianAndIqrUseLinearInterpolation)
{
    const auto s = summarize({5, 1, 4, 2, 3}, 1, 0.10);
    EXPECT_DOUBLE_EQ(s.median, 3.0);
    EXPECT_DOUBLE_EQ(s.iqr, 2.0);
    EXPECT_TRUE(s.unstable);
    EXPECT_EQ(s.runs, (std::vector<double>{5, 1, 4, 2, 3}));
    const auto even = summarize({10, 10, 10, 11}, 0, 0.10);
    EXPECT_DOUBLE_EQ(even.median, 10.0);
    EXPECT_DOUBLE_EQ(even.iqr, 0.25);
    EXPECT_FALSE(even.unstable);
}

TEST(Timing, ReportedTimingFromProcess)
{
    auto s = spec_for(script("pt.sh", "echo '@warp-lens pseudo-time 777'; echo ok"));
    s.timing = TimingSource::Reported;
    MeasurementToken::reset_counters();
    const auto sample = measure_execution(ProcessRuntime{s}, "m.wasm", {3, 2, 0.1, 10s});
    EXPECT_EQ(sample.median, 777.0);
    EXPECT_EQ(sample.runs.size(), 3u);
    EXPECT_EQ(MeasurementToken::total_timed_runs(), 3u);
    EXPECT_GT(sample.wall_median, 0.0);
}

TEST(Timing, FailuresAndMissingReportsAbort)
{
    auto s = spec_for(script("plain.sh", "echo ok"));
    s.timing = TimingSource::Reported;
    EXPECT_THROW((void)measure_execution(ProcessRuntime{s}, "m.wasm", {3, 0, 0.1, 10s}), Error);
    const auto failing = spec_for(script("fail.sh", "exit 2"));
    try
    {
        (void)measure_execution(ProcessRuntime{failing}, "m.wasm", {3, 0, 0.1, 10s});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::MeasurementFailure);
    }
    EXPECT_THROW((void)measure_execution(ProcessRuntime{failing}, "m.wasm", {2, 0, 0.1, 10s}), Error);
}

TEST(Timing, TimedRunsNeverOverlap)
{
    const CountingRuntime rt{42};
    MeasurementToken::reset_counters();
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i)
        threads.emplace_back([&] { (void)measure_execution(rt, "m.wasm", {3, 1, 0.1, 10s}); });
    for (auto& t : threads)
        t.join();
    EXPECT_EQ(rt.peak(), 1);
    EXPECT_EQ(MeasurementToken::max_concurrent(), 1);
    EXPECT_EQ(MeasurementToken::total_timed_runs(), 18u);
    EXPECT_FALSE(MeasurementToken::held());
}
