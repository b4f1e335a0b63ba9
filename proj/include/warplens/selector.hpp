// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/harness.hpp"
#include "warplens/mutation.hpp"
#include <optional>
#include <string>
#include <vector>

namespace warplens::select
{
struct ScoreWeights
{
    double alpha = 0.5;
    double beta = 0.5;
    /// Both weights must lie in (0, 1]. Throws Error{ConfigError}.
    void check() const;
};

/// 1 - exp(1 - r) above 1, 1 - r^2 otherwise. Throws NonPositiveRatio.
double perf_diff_score(double ratio);
/// exp(1 - r) above 1, r^2 otherwise. Throws NonPositiveRatio.
double func_sim_score(double ratio);

/// Median times of one program on the two runtimes.
struct ProgramTimes
{
    double buggy = 0;
    double oracle = 0;
};

struct MutantScore
{
    std::size_t ordinal = 0;
    mutate::Rule rule = mutate::Rule::OperandSubst;
    double perf_ratio = 0;
    double func_ratio = 0;
    double perf_score = 0;
    double func_score = 0;
    double total = 0;
    bool disqualified = false;
    std::string reason;

    bool operator==(const MutantScore&) const = default;
};

/// Throws ZeroTiming when any time is not a positive finite number.
MutantScore score_mutant(const ProgramTimes& original, const ProgramTimes& mutant, const ScoreWeights& w);

/// Functional-run results of one mutant on both runtimes.
struct FunctionalResult
{
    std::size_t ordinal = 0;
    mutate::Rule rule = mutate::Rule::OperandSubst;
    harness::ExecutionOutcome buggy;
    harness::ExecutionOutcome oracle;
};

/// Why a mutant cannot be scored, or nullopt when it qualifies.
std::optional<std::string> disqualification(const FunctionalResult& r, const std::string& original_oracle_digest);

struct FilterResult
{
    std::vector<FunctionalResult> qualified;
    std::vector<MutantScore> disqualified;  ///< only ordinal, rule, and reason are set
};

FilterResult filter_invalid(const std::vector<FunctionalResult>& results, const std::string& original_oracle_digest);

/// Total descending, then func-sim score descending, then ordinal ascending.
std::vector<MutantScore> rank_mutants(std::vector<MutantScore> scores);

/// Tab-separated table: ranked rows first, then disqualified rows by ordinal.
std::string score_table(const std::vector<MutantScore>& ranked, const std::vector<MutantScore>& disqualified);
}  // namespace warplens::select
