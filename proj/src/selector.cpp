// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/selector.hpp"
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace warplens::select
{
namespace
{
void check_ratio(double r)
{
    if (!(r > 0) || !std::isfinite(r))
        throw Error{Errc::NonPositiveRatio, fmt::format("ratio {} is not a positive finite number", r)};
}

void check_time(double t, const char* what)
{
    if (!(t > 0) || !std::isfinite(t))
        throw Error{Errc::ZeroTiming, fmt::format("{} time {} is not positive", what, t)};
}

std::string failure_reason(const harness::ExecutionOutcome& o, const char* runtime)
{
    if (o.timed_out)
        return fmt::format("timeout on {}", runtime);
    if (o.trapped)
        return fmt::format("trap on {}", runtime);
    return fmt::format("exit {} on {}", o.exit_status, runtime);
}
}  // namespace

void ScoreWeights::check() const
{
    for (const double w : {alpha, beta})
        if (!(w > 0 && w <= 1))
            throw Error{Errc::ConfigError, fmt::format("score weight {} outside (0, 1]", w)};
}

double perf_diff_score(double r)
{
    check_ratio(r);
    // Clamped so the open upper bound survives rounding for large ratios.
    return r > 1 ? std::min(-std::expm1(1 - r), std::nextafter(1.0, 0.0)) : 1 - r * r;
}

double func_sim_score(double r)
{
    check_ratio(r);
    return std::max(r > 1 ? std::exp(1 - r) : r * r, std::numeric_limits<double>::denorm_min());
}

MutantScore score_mutant(const ProgramTimes& original, const ProgramTimes& mutant, const ScoreWeights& w)
{
    check_time(original.buggy, "original buggy");
    check_time(original.oracle, "original oracle");
    check_time(mutant.buggy, "mutant buggy");
    check_time(mutant.oracle, "mutant oracle");
    MutantScore s;
    s.perf_ratio = original.buggy / mutant.buggy;
    s.func_ratio = original.oracle / mutant.oracle;
    s.perf_score = perf_diff_score(s.perf_ratio);
    s.func_score = func_sim_score(s.func_ratio);
    s.total = w.alpha * s.perf_score + w.beta * s.func_score;
    return s;
}

std::optional<std::string> disqualification(const FunctionalResult& r, const std::string& original_oracle_digest)
{
    if (!r.buggy.ok())
        return failure_reason(r.buggy, "buggy");
    if (!r.oracle.ok())
        return failure_reason(r.oracle, "oracle");
    if (r.oracle.stdout_digest != original_oracle_digest)
        return "oracle output differs";
    return std::nullopt;
}

FilterResult filter_invalid(const std::vector<FunctionalResult>& results, const std::string& original_oracle_digest)
{
    FilterResult out;
    for (const auto& r : results)
    {
        if (auto why = disqualification(r, original_oracle_digest))
        {
            MutantScore s;
            s.ordinal = r.ordinal;
            s.rule = r.rule;
            s.disqualified = true;
            s.reason = std::move(*why);
            out.disqualified.push_back(std::move(s));
        }
        else
            out.qualified.push_back(r);
    }
    return out;
}

std::vector<MutantScore> rank_mutants(std::vector<MutantScore> scores)
{
    std::sort(scores.begin(), scores.end(), [](const MutantScore& a, const MutantScore& b) {
        if (a.total != b.total)
            return a.total > b.total;
        if (a.func_score != b.func_score)
            return a.func_score > b.func_score;
        return a.ordinal < b.ordinal;
    });
    return scores;
}

std::string score_table(const std::vector<MutantScore>& ranked, const std::vector<MutantScore>& disqualified)
{
    std::string out = "rank\tordinal\trule\tperf_ratio\tfunc_ratio\tperf_score\tfunc_score\ttotal\tstatus\n";
    for (std::size_t i = 0; i < ranked.size(); ++i)
    {
        const auto& s = ranked[i];
        out += fmt::format("{}\t{}\t{}\t{:.9g}\t{:.9g}\t{:.9f}\t{:.9f}\t{:.9f}\tqualified\n", i + 1, s.ordinal,
                           mutate::rule_name(s.rule), s.perf_ratio, s.func_ratio, s.perf_score, s.func_score, s.total);
    }
    auto dq = disqualified;
    std::sort(dq.begin(), dq.end(), [](const auto& a, const auto& b) { return a.ordinal < b.ordinal; });
    for (const auto& s : dq)
        out += fmt::format("-\t{}\t{}\t-\t-\t-\t-\t-\t{}\n", s.ordinal, mutate::rule_name(s.rule), s.reason);
    return out;
}
}  // namespace warplens::select
