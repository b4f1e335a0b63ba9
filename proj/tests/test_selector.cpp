// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/error.hpp"
#include "warplens/selector.hpp"
#include <cmath>
#include <gtest/gtest.h>
#include <random>

using namespace warplens;
using namespace warplens::select;

// Reference values evaluated with mpmath at 50 digits.
namespace oracle
{
constexpr double perf_diff_2 = 0.632120558828557678;
constexpr double func_sim_101 = 0.990049833749168054;
constexpr double total_2_1 = 0.816060279414278839;
constexpr double total_777_101 = 0.994451069549133313;
}  // namespace oracle

namespace
{
Errc error_of(auto&& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    return Errc::ConfigError;
}

harness::ExecutionOutcome ok(std::string digest = "d")
{
    harness::ExecutionOutcome o;
    o.stdout_digest = std::move(digest);
    return o;
}
}  // namespace

TEST(Scores, ReferenceValues)
{
    EXPECT_NEAR(perf_diff_score(2.0), oracle::perf_diff_2, 1e-12);
    EXPECT_NEAR(perf_diff_score(2.0), 1 - std::exp(-1.0), 1e-9);
    EXPECT_NEAR(func_sim_score(1.01), oracle::func_sim_101, 1e-12);
    EXPECT_NEAR(perf_diff_score(0.5), 0.75, 1e-15);
    EXPECT_NEAR(func_sim_score(0.5), 0.25, 1e-15);
    EXPECT_EQ(perf_diff_score(1.0), 0.0);
    EXPECT_EQ(func_sim_score(1.0), 1.0);
}

TEST(Scores, TotalsFromRatioPairs)
{
    const ScoreWeights w;
    const auto a = score_mutant({2.0, 1.0}, {1.0, 1.0}, w);
    EXPECT_DOUBLE_EQ(a.perf_ratio, 2.0);
    EXPECT_DOUBLE_EQ(a.func_ratio, 1.0);
    EXPECT_NEAR(a.total, oracle::total_2_1, 1e-12);
    EXPECT_NEAR(a.total, 0.816060, 1e-6);
    const auto b = score_mutant({7.77, 1.01}, {1.0, 1.0}, w);
    EXPECT_NEAR(b.total, oracle::total_777_101, 1e-12);
    EXPECT_NEAR(b.total, 0.994452, 1e-6);
    EXPECT_EQ(score_mutant({3.0, 3.0}, {3.0, 3.0}, w).total, 0.5);
}

TEST(Scores, ErrorsOnBadInputs)
{
    EXPECT_EQ(error_of([] { (void)perf_diff_score(0.0); }), Errc::NonPositiveRatio);
    EXPECT_EQ(error_of([] { (void)func_sim_score(-1.0); }), Errc::NonPositiveRatio);
    EXPECT_EQ(error_of([] { (void)func_sim_score(NAN); }), Errc::NonPositiveRatio);
    EXPECT_EQ(error_of([] { (void)score_mutant({1, 1}, {0, 1}, {}); }), Errc::ZeroTiming);
    EXPECT_EQ(error_of([] { (void)score_mutant({1, 0}, {1, 1}, {}); }), Errc::ZeroTiming);
    EXPECT_EQ(error_of([] { ScoreWeights{0.0, 0.5}.check(); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { ScoreWeights{0.5, 1.5}.check(); }), Errc::ConfigError);
    EXPECT_NO_THROW((ScoreWeights{1.0, 0.25}.check()));
}

TEST(Scores, BoundednessAndMonotonicity)
{
    std::mt19937_64 rng{20260101};
    std::uniform_real_distribution<double> log_r{std::log(1e-3), std::log(1e3)};
    for (int i = 0; i < 10'000; ++i)
    {
        const double r = std::exp(log_r(rng));
        const double p = perf_diff_score(r);
        const double f = func_sim_score(r);
        ASSERT_GE(p, 0.0);
        ASSERT_LT(p, 1.0);
        ASSERT_GT(f, 0.0);
        ASSERT_LE(f, 1.0);
        const double s = r * (1 + 1e-6);
        if (r > 1)
        {
            // Strictness only where consecutive values are distinguishable in double.
            ASSERT_LE(p, perf_diff_score(s)) << r;
            ASSERT_GE(f, func_sim_score(s)) << r;
            if (r < 20)
                ASSERT_LT(p, perf_diff_score(s)) << r;
            if (r < 700)
                ASSERT_GT(f, func_sim_score(s)) << r;
        }
        else if (s < 1)
        {
            ASSERT_GT(p, perf_diff_score(s)) << r;
            ASSERT_LT(f, func_sim_score(s)) << r;
        }
    }
}

TEST(Scores, ExtremeRatiosStayInsideBounds)
{
    EXPECT_LT(perf_diff_score(1e6), 1.0);
    EXPECT_GT(func_sim_score(1e6), 0.0);
    EXPECT_GT(perf_diff_score(1e-200), 0.99);
}

TEST(Scores, ContinuousAtOne)
{
    EXPECT_NEAR(perf_diff_score(1 - 1e-9), perf_diff_score(1 + 1e-9), 1e-6);
    EXPECT_NEAR(func_sim_score(1 - 1e-9), func_sim_score(1 + 1e-9), 1e-6);
    EXPECT_NEAR(perf_diff_score(1 + 1e-9), 0.0, 1e-6);
    EXPECT_NEAR(func_sim_score(1 - 1e-9), 1.0, 1e-6);
}

TEST(Ranking, OrderAndTieBreaks)
{
    std::vector<MutantScore> s(4);
    s[0] = {.ordinal = 4, .func_score = 0.9, .total = 0.7};
    s[1] = {.ordinal = 2, .func_score = 0.8, .total = 0.9};
    s[2] = {.ordinal = 9, .func_score = 1.0, .total = 0.7};
    s[3] = {.ordinal = 3, .func_score = 0.9, .total = 0.7};
    const auto r = rank_mutants(s);
    std::vector<std::size_t> order;
    for (const auto& x : r)
        order.push_back(x.ordinal);
    EXPECT_EQ(order, (std::vector<std::size_t>{2, 9, 3, 4}));
    EXPECT_EQ(rank_mutants({s[0]}).front().ordinal, 4u);
}

TEST(Ranking, InvariantUnderCommonTimeScaling)
{
    std::mt19937_64 rng{7};
    std::uniform_real_distribution<double> t{0.5, 5.0};
    const ProgramTimes orig{t(rng), t(rng)};
    std::vector<ProgramTimes> mutants;
    for (int i = 0; i < 200; ++i)
        mutants.push_back({t(rng), t(rng)});
    const auto ranking = [&](double k) {
        std::vector<MutantScore> s;
        for (std::size_t i = 0; i < mutants.size(); ++i)
        {
            auto m = score_mutant({orig.buggy * k, orig.oracle * k}, {mutants[i].buggy * k, mutants[i].oracle * k}, {});
            m.ordinal = i + 1;
            s.push_back(m);
        }
        std::vector<std::size_t> order;
        for (const auto& x : rank_mutants(s))
            order.push_back(x.ordinal);
        return order;
    };
    const auto base = ranking(1.0);
    for (const double k : {0.001, 0.5, 3.0, 1000.0})
        EXPECT_EQ(ranking(k), base) << k;
}

TEST(Filter, DisqualificationReasons)
{
    const std::string digest = "d";
    FunctionalResult good{1, mutate::Rule::OperatorSubst, ok(), ok()};
    EXPECT_EQ(disqualification(good, digest), std::nullopt);

    auto loop = good;
    loop.buggy.timed_out = true;
    EXPECT_EQ(disqualification(loop, digest), "timeout on buggy");
    auto trap = good;
    trap.oracle.trapped = true;
    trap.oracle.exit_status = 3;
    EXPECT_EQ(disqualification(trap, digest), "trap on oracle");
    auto exit = good;
    exit.oracle.exit_status = 9;
    EXPECT_EQ(disqualification(exit, digest), "exit 9 on oracle");
    auto diverged = good;
    diverged.oracle.stdout_digest = "other";
    EXPECT_EQ(disqualification(diverged, digest), "oracle output differs");
    auto buggy_output = good;
    buggy_output.buggy.stdout_digest = "other";
    EXPECT_EQ(disqualification(buggy_output, digest), std::nullopt);

    const auto f = filter_invalid({good, loop, trap}, digest);
    ASSERT_EQ(f.qualified.size(), 1u);
    ASSERT_EQ(f.disqualified.size(), 2u);
    EXPECT_TRUE(f.disqualified[0].disqualified);
    EXPECT_TRUE(filter_invalid({loop}, digest).qualified.empty());
}

TEST(Table, StableLayout)
{
    auto a = score_mutant({2, 1}, {1, 1}, {});
    a.ordinal = 7;
    a.rule = mutate::Rule::OperatorSubst;
    MutantScore dq;
    dq.ordinal = 3;
    dq.rule = mutate::Rule::OperandSubst;
    dq.disqualified = true;
    dq.reason = "trap on buggy";
    const auto t = score_table({a}, {dq});
    EXPECT_EQ(t, "rank\tordinal\trule\tperf_ratio\tfunc_ratio\tperf_score\tfunc_score\ttotal\tstatus\n"
                 "1\t7\trule2\t2\t1\t0.632120559\t1.000000000\t0.816060279\tqualified\n"
                 "-\t3\trule1\t-\t-\t-\t-\t-\ttrap on buggy\n");
}
