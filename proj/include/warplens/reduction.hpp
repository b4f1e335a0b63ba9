// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/harness.hpp"
#include "warplens/selector.hpp"
#include <filesystem>
#include <string>

namespace warplens::reduce
{
/// Accepted interval for a ratio, inclusive on both ends.
struct Band
{
    double low = 0.5;
    double high = 2.0;
    bool contains(double v) const noexcept { return v >= low && v <= high; }
    void check() const;
};

struct ReductionVerdict
{
    select::ProgramTimes original;
    select::ProgramTimes reduced;
    /// reduced buggy / original buggy
    double buggy_ratio = 0;
    /// (reduced buggy / reduced oracle) / (original buggy / original oracle)
    double gap_ratio = 0;
    bool buggy_ok = false;
    bool gap_ok = false;
    Band buggy_band;
    Band gap_band;

    bool pass() const noexcept { return buggy_ok && gap_ok; }
};

/// Both checks on already measured medians. Throws ZeroTiming.
ReductionVerdict evaluate_reduction(const select::ProgramTimes& original, const select::ProgramTimes& reduced,
                                    const Band& buggy_band = {}, const Band& gap_band = {});

/// Validates both modules, measures both on both runtimes, and evaluates.
/// Throws MeasurementFailure when any timed run fails, MalformedBinary on invalid input.
ReductionVerdict validate_reduction(const std::filesystem::path& original, const std::filesystem::path& reduced,
                                    const harness::Runtime& buggy, const harness::Runtime& oracle,
                                    const harness::MeasureOptions& measure, const Band& buggy_band = {},
                                    const Band& gap_band = {});

std::string describe(const ReductionVerdict& v);
}  // namespace warplens::reduce
