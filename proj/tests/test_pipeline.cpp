// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "warplens/error.hpp"
#include "warplens/mock.hpp"
#include "warplens/pipeline.hpp"
#include <gtest/gtest.h>

using namespace warplens;
using namespace warplens::pipeline;
using warplens::testing::ScratchDir;

namespace
{
std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    return {std::istreambuf_iterator<char>{in}, {}};
}

struct Rig
{
    mock::MockRuntime buggy{"mock-div", harness::Role::Buggy,
                            mock::CostModel::parse("multiplier i64.div_* 50 expand 5\nstep_budget 1000000\n")};
    mock::MockRuntime oracle{"mock-uniform", harness::Role::Oracle, mock::CostModel::parse("step_budget 1000000\n")};
    ScratchDir dir{"pipeline"};

    config::PipelineConfig config(const std::string& corpus_name, const std::string& out = "out") const
    {
        config::PipelineConfig c;
        c.input = warplens::testing::corpus_dir() / corpus_name;
        c.out = dir / out;
        c.repetitions = 3;
        c.warmups = 1;
        c.top_k = 3;
        return c;
    }

    PipelineResult run(const config::PipelineConfig& c) const { return run_pipeline(c, buggy, oracle); }
};

const select::MutantScore* find_div_add(const PipelineResult& r)
{
    for (const auto& s : r.bundle.ranked)
        for (const auto& c : r.bundle.candidates)
            if (c.entry.ordinal == s.ordinal && c.entry.before == "i64.div_u" && c.entry.after == "i64.add")
                return &s;
    return nullptr;
}
}  // namespace

TEST(Pipeline, DeadDivisionRanksDivisionSiteFirst)
{
    const Rig rig;
    const auto r = rig.run(rig.config("dead_division.wasm"));
    ASSERT_EQ(r.exit_status, ReportProduced) << r.message;
    EXPECT_DOUBLE_EQ(r.bundle.original_times.buggy, 61'002);
    EXPECT_DOUBLE_EQ(r.bundle.original_times.oracle, 12'002);
    ASSERT_EQ(r.bundle.candidates.size(), 3u);
    for (const auto& c : r.bundle.candidates)
    {
        EXPECT_EQ(c.entry.offset + c.entry.span > 3 && c.entry.offset <= 3, true)
            << "top candidate touches the division: " << c.entry.before;
        EXPECT_TRUE(c.dump_error.empty()) << c.dump_error;
    }
    const auto* s = find_div_add(r);
    ASSERT_NE(s, nullptr) << "i64.div_u => i64.add is in the top 3";
    EXPECT_EQ(s->rule, mutate::Rule::OperatorSubst);
    EXPECT_EQ(s->func_ratio, 1.0);
    EXPECT_NEAR(s->perf_ratio, 61'002.0 / 12'002.0, 1e-12);
    EXPECT_NEAR(s->total, 0.99, 0.01);
    for (const auto& c : r.bundle.candidates)
        if (c.entry.ordinal == s->ordinal)
        {
            EXPECT_EQ(diff::total_identified(c.diffs), 5u);
            for (const auto& d : c.diffs)
                for (const auto& e : d.script.ops)
                    if (e.kind == diff::EditKind::Delete)
                        EXPECT_EQ(e.mnemonic, "div_expand");
        }
    for (const auto& d : r.bundle.disqualified)
        EXPECT_FALSE(d.reason.empty());
    EXPECT_EQ(r.bundle.ranked.size() + r.bundle.disqualified.size(), r.mutants);
}

TEST(Pipeline, TimedRunBudgetAndSerialization)
{
    const Rig rig;
    harness::MeasurementToken::reset_counters();
    const auto c = rig.config("dead_division.wasm");
    const auto r = rig.run(c);
    ASSERT_EQ(r.exit_status, ReportProduced) << r.message;
    EXPECT_EQ(r.timed_runs, (1 + r.qualified) * 2 * c.repetitions);
    EXPECT_EQ(harness::MeasurementToken::total_timed_runs(), r.timed_runs);
    EXPECT_EQ(harness::MeasurementToken::max_concurrent(), 1);
    EXPECT_EQ(r.cached_samples, 0u);
}

TEST(Pipeline, RerunReusesWorkingDirectory)
{
    const Rig rig;
    const auto c = rig.config("dead_division.wasm");
    const auto first = rig.run(c);
    ASSERT_EQ(first.exit_status, ReportProduced) << first.message;
    const auto table = slurp(c.out / "scores.tsv");
    const auto second = rig.run(c);
    ASSERT_EQ(second.exit_status, ReportProduced) << second.message;
    EXPECT_EQ(second.timed_runs, 0u);
    EXPECT_EQ(second.cached_samples, (1 + second.qualified) * 2);
    EXPECT_EQ(slurp(c.out / "scores.tsv"), table);
}

TEST(Pipeline, DeterministicReports)
{
    const Rig rig;
    const auto a = rig.run(rig.config("dead_division.wasm", "a"));
    const auto b = rig.run(rig.config("dead_division.wasm", "b"));
    ASSERT_EQ(a.exit_status, ReportProduced);
    ASSERT_EQ(b.exit_status, ReportProduced);
    for (const auto* f : {"report.txt", "report.html", "summary.jsonl", "scores.tsv", "mutants/manifest.jsonl",
                          "dumps/original.dis"})
        EXPECT_EQ(slurp(rig.dir / "a" / f), slurp(rig.dir / "b" / f)) << f;
}

TEST(Pipeline, RescoreFromWorkingDirectory)
{
    const Rig rig;
    const auto c = rig.config("dead_division.wasm");
    const auto r = rig.run(c);
    ASSERT_EQ(r.exit_status, ReportProduced);
    const auto persisted = load_persisted_scores(c.effective_workdir());
    EXPECT_EQ(persisted.original.buggy, 61'002);
    EXPECT_EQ(persisted.mutants.size(), r.qualified);
    EXPECT_EQ(persisted.disqualified.size(), r.bundle.disqualified.size());
    const auto same = rescore(persisted, c.weights);
    ASSERT_EQ(same.size(), r.bundle.ranked.size());
    for (std::size_t i = 0; i < same.size(); ++i)
    {
        EXPECT_EQ(same[i].ordinal, r.bundle.ranked[i].ordinal);
        EXPECT_EQ(same[i].total, r.bundle.ranked[i].total);
    }
    const auto perf_only = rescore(persisted, {1.0, 1e-9});
    EXPECT_EQ(perf_only.size(), same.size());
    EXPECT_THROW(rescore(persisted, {0, 1}), Error);
    EXPECT_THROW(load_persisted_scores(rig.dir / "missing"), Error);
}

TEST(Pipeline, NoMutableInstructions)
{
    const Rig rig;
    const auto c = rig.config("control_only.wasm");
    const auto r = rig.run(c);
    EXPECT_EQ(r.exit_status, NoQualifiedMutants) << r.message;
    EXPECT_EQ(r.mutants, 0u);
    EXPECT_NE(slurp(c.out / "report.txt").find("No qualified mutant found"), std::string::npos);
}

TEST(Pipeline, OriginalFailureIsOperational)
{
    const Rig rig;
    warplens::testing::ModuleSpec s;
    s.body = {wasm::make_i32_const(1), wasm::make_simple(wasm::op::drop), wasm::make_simple(wasm::op::unreachable)};
    const auto path = rig.dir / "trap.wasm";
    warplens::testing::write_file(path, wasm::encode_module(warplens::testing::build_module(s)));
    auto c = rig.config("dead_division.wasm");
    c.input = path;
    const auto r = rig.run(c);
    EXPECT_EQ(r.exit_status, OperationalFailure);
    EXPECT_NE(r.message.find("original program fails"), std::string::npos) << r.message;
}

TEST(Pipeline, UnsupportedModuleIsOperational)
{
    const Rig rig;
    const auto r = rig.run(rig.config("simd_refs.wasm"));
    EXPECT_EQ(r.exit_status, OperationalFailure);
    EXPECT_FALSE(r.message.empty());
}

TEST(Pipeline, RejectsIdenticalRuntimes)
{
    const Rig rig;
    EXPECT_THROW(run_pipeline(rig.config("dead_division.wasm"), rig.buggy, rig.buggy), Error);
}

TEST(Pipeline, SampleKeyDependsOnInputs)
{
    const Rig rig;
    const Bytes a{1, 2, 3};
    const Bytes b{1, 2, 4};
    harness::MeasureOptions o;
    EXPECT_EQ(sample_key(a, rig.buggy.spec(), o), sample_key(a, rig.buggy.spec(), o));
    EXPECT_NE(sample_key(a, rig.buggy.spec(), o), sample_key(b, rig.buggy.spec(), o));
    EXPECT_NE(sample_key(a, rig.buggy.spec(), o), sample_key(a, rig.oracle.spec(), o));
    auto o2 = o;
    o2.repetitions = 9;
    EXPECT_NE(sample_key(a, rig.buggy.spec(), o), sample_key(a, rig.buggy.spec(), o2));
}
