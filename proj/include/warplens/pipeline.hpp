// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/config.hpp"
#include "warplens/harness.hpp"
#include "warplens/mutation.hpp"
#include "warplens/report.hpp"
#include <functional>
#include <string>

namespace warplens::pipeline
{
enum ExitStatus : int
{
    ReportProduced = 0,
    OperationalFailure = 1,
    NoQualifiedMutants = 2,
};

using Logger = std::function<void(std::string_view)>;

struct PipelineResult
{
    int exit_status = OperationalFailure;
    report::ReportBundle bundle;
    mutate::GenerationStats generation;
    std::size_t mutants = 0;
    std::size_t qualified = 0;
    std::size_t timed_runs = 0;     ///< runs performed now, cache hits excluded
    std::size_t cached_samples = 0; ///< TimingSamples reused from the working directory
    std::string message;
};

/// Cache key of one timing sample: module bytes, runtime fingerprint, repetitions, warmups.
std::string sample_key(ByteView module, const harness::RuntimeSpec& spec, const harness::MeasureOptions& opt);

/// Runs the whole pipeline with the given runtimes (the config's runtime
/// specs are not consulted). Errors inside a stage are reported through the
/// result with exit status 1; ConfigError is thrown before any work starts.
PipelineResult run_pipeline(const config::PipelineConfig& cfg, const harness::Runtime& buggy,
                            const harness::Runtime& oracle, const Logger& log = {});

/// Persisted per-mutant medians written by run_pipeline (`scores_input.jsonl` in the working directory).
struct PersistedScores
{
    select::ProgramTimes original;
    std::vector<std::pair<select::MutantScore, select::ProgramTimes>> mutants;  ///< score fields except totals
    std::vector<select::MutantScore> disqualified;
};

PersistedScores load_persisted_scores(const std::filesystem::path& workdir);

/// Rescores persisted medians with new weights; returns the ranked list.
std::vector<select::MutantScore> rescore(const PersistedScores& p, const select::ScoreWeights& w);
}  // namespace warplens::pipeline
