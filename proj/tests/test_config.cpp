// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "warplens/config.hpp"
#include "warplens/error.hpp"
#include <gtest/gtest.h>

using namespace warplens;
using namespace warplens::config;

namespace
{
const char* kSample = R"(# comment
input = prog.wasm
out = /tmp/report
alpha = 0.25
beta = 0.75
reps = 7
top_k = 3
pool_i32 = 0,1,-1
buggy_band = 0.25,4

[buggy]
name = fast-jit
invoke = {warp_lens} mock-run --cost-model {config_dir}/slow.cost {module}
dump = {warp_lens} mock-run --cost-model {config_dir}/slow.cost --dump {module}
timing = reported
timeout = 12.5
trap_exit_codes = 3, 134
env.RUST_LOG = off

[oracle]
invoke = other-rt run {module}
)";

Errc code_of(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::Trap;
}
}  // namespace

TEST(Config, ParsesTopLevelAndSections)
{
    const auto c = parse_config(kSample, "/etc/wl", {{"warp_lens", "/usr/bin/warp-lens"}});
    EXPECT_EQ(c.input, "/etc/wl/prog.wasm");
    EXPECT_EQ(c.out, "/tmp/report");
    EXPECT_EQ(c.effective_workdir(), "/tmp/report/work");
    EXPECT_DOUBLE_EQ(c.weights.alpha, 0.25);
    EXPECT_DOUBLE_EQ(c.weights.beta, 0.75);
    EXPECT_EQ(c.repetitions, 7u);
    EXPECT_EQ(c.top_k, 3u);
    EXPECT_EQ(c.warmups, 1u);
    EXPECT_EQ(c.pool.i32.size(), 3u);
    EXPECT_DOUBLE_EQ(c.buggy_band.low, 0.25);
    EXPECT_DOUBLE_EQ(c.buggy_band.high, 4.0);

    EXPECT_EQ(c.buggy.name, "fast-jit");
    EXPECT_EQ(c.buggy.role, harness::Role::Buggy);
    EXPECT_EQ(c.buggy.invoke, "/usr/bin/warp-lens mock-run --cost-model /etc/wl/slow.cost {module}");
    EXPECT_EQ(c.buggy.dump, "/usr/bin/warp-lens mock-run --cost-model /etc/wl/slow.cost --dump {module}");
    EXPECT_EQ(c.buggy.timing, harness::TimingSource::Reported);
    EXPECT_DOUBLE_EQ(c.buggy.timeout.count(), 12.5);
    EXPECT_EQ(c.buggy.trap_exit_codes, (std::set<int>{3, 134}));
    EXPECT_EQ(c.buggy.env.at("RUST_LOG"), "off");

    EXPECT_EQ(c.oracle.name, "oracle");
    EXPECT_EQ(c.oracle.role, harness::Role::Oracle);
    EXPECT_EQ(c.oracle.timing, harness::TimingSource::Wall);
    EXPECT_NO_THROW(c.check());
}

TEST(Config, DefaultsMatchDocumentation)
{
    const PipelineConfig c;
    EXPECT_DOUBLE_EQ(c.weights.alpha, 0.5);
    EXPECT_DOUBLE_EQ(c.weights.beta, 0.5);
    EXPECT_EQ(c.repetitions, 5u);
    EXPECT_EQ(c.top_k, 5u);
    EXPECT_EQ(c.mutant_cap, 2000u);
    EXPECT_DOUBLE_EQ(c.buggy_band.low, 0.5);
    EXPECT_DOUBLE_EQ(c.gap_band.high, 2.0);
}

TEST(Config, FlagSpellingsNormalize)
{
    PipelineConfig c;
    set_option(c, "--top-k", "9");
    set_option(c, "--mutant-cap", "10");
    set_option(c, "repetitions", "4");
    EXPECT_EQ(c.top_k, 9u);
    EXPECT_EQ(c.mutant_cap, 10u);
    EXPECT_EQ(c.repetitions, 4u);
}

TEST(Config, RejectsBadInput)
{
    PipelineConfig c;
    EXPECT_EQ(code_of([&] { set_option(c, "no_such_key", "1"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { set_option(c, "reps", "five"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { set_option(c, "alpha", "0.5x"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { set_option(c, "gap_band", "2"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { set_option(c, "gap_band", "3,1"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { set_option(c, "pool_negate", "maybe"); }), Errc::ConfigError);
    harness::RuntimeSpec s;
    EXPECT_EQ(code_of([&] { set_runtime_option(s, "timing", "cpu"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([&] { set_runtime_option(s, "colour", "red"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([] { (void)parse_config("[extra]\nx = 1\n", "/"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([] { (void)parse_config("[buggy\n", "/"); }), Errc::ConfigError);
    EXPECT_EQ(code_of([] { (void)load_config("/nonexistent/warp.ini"); }), Errc::ConfigError);
}

TEST(Config, CheckNamesViolations)
{
    auto c = parse_config(kSample, "/etc/wl", {{"warp_lens", "wl"}});
    auto broken = c;
    broken.oracle = broken.buggy;
    broken.oracle.role = harness::Role::Oracle;
    EXPECT_EQ(code_of([&] { broken.check(); }), Errc::ConfigError);
    broken = c;
    broken.repetitions = 2;
    EXPECT_EQ(code_of([&] { broken.check(); }), Errc::ConfigError);
    broken = c;
    broken.weights.alpha = 0;
    EXPECT_EQ(code_of([&] { broken.check(); }), Errc::ConfigError);
    broken = c;
    broken.input.clear();
    EXPECT_EQ(code_of([&] { broken.check(); }), Errc::ConfigError);
}

TEST(Config, LoadResolvesAgainstConfigDirectory)
{
    warplens::testing::ScratchDir dir{"config"};
    {
        std::ofstream out{dir / "run.ini"};
        out << "input = m.wasm\n[buggy]\ninvoke = a {module}\n[oracle]\ninvoke = b {config_dir}/x {module}\n";
    }
    const auto c = load_config(dir / "run.ini");
    EXPECT_EQ(c.input, dir.path() / "m.wasm");
    EXPECT_EQ(c.out, dir.path() / "warp-lens-report");
    EXPECT_EQ(c.oracle.invoke, "b " + dir.path().string() + "/x {module}");
}
