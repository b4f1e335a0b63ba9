// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/reduction.hpp"
#include "warplens/validator.hpp"
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iterator>

namespace warplens::reduce
{
namespace
{
void require_valid(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        throw Error{Errc::ConfigError, "cannot read " + p.string()};
    const Bytes bytes{std::istreambuf_iterator<char>{in}, {}};
    if (const auto v = wasm::validate_module(bytes); !v)
        throw Error{Errc::MalformedBinary, p.string() + ": " + v.describe()};
}

void check_times(const select::ProgramTimes& t, const char* which)
{
    for (const double v : {t.buggy, t.oracle})
        if (!(v > 0) || !std::isfinite(v))
            throw Error{Errc::ZeroTiming, fmt::format("{} program has a non-positive time", which)};
}
}  // namespace

void Band::check() const
{
    if (!(low > 0) || !(high >= low))
        throw Error{Errc::ConfigError, fmt::format("bad tolerance band [{}, {}]", low, high)};
}

ReductionVerdict evaluate_reduction(const select::ProgramTimes& original, const select::ProgramTimes& reduced,
                                    const Band& buggy_band, const Band& gap_band)
{
    buggy_band.check();
    gap_band.check();
    check_times(original, "original");
    check_times(reduced, "reduced");
    ReductionVerdict v;
    v.original = original;
    v.reduced = reduced;
    v.buggy_band = buggy_band;
    v.gap_band = gap_band;
    v.buggy_ratio = reduced.buggy / original.buggy;
    v.gap_ratio = (reduced.buggy / reduced.oracle) / (original.buggy / original.oracle);
    v.buggy_ok = buggy_band.contains(v.buggy_ratio);
    v.gap_ok = gap_band.contains(v.gap_ratio);
    return v;
}

ReductionVerdict validate_reduction(const std::filesystem::path& original, const std::filesystem::path& reduced,
                                    const harness::Runtime& buggy, const harness::Runtime& oracle,
                                    const harness::MeasureOptions& measure, const Band& buggy_band,
                                    const Band& gap_band)
{
    require_valid(original);
    require_valid(reduced);
    const auto times = [&](const std::filesystem::path& p) {
        return select::ProgramTimes{harness::measure_execution(buggy, p, measure).median,
                                    harness::measure_execution(oracle, p, measure).median};
    };
    const auto o = times(original);
    const auto r = times(reduced);
    return evaluate_reduction(o, r, buggy_band, gap_band);
}

std::string describe(const ReductionVerdict& v)
{
    const auto line = [](const char* name, double ratio, const Band& b, bool ok) {
        return fmt::format("{}: {:.6g} in [{:g}, {:g}] -> {}\n", name, ratio, b.low, b.high, ok ? "pass" : "FAIL");
    };
    std::string out;
    out += fmt::format("original: buggy {:.6g}, oracle {:.6g}\n", v.original.buggy, v.original.oracle);
    out += fmt::format("reduced:  buggy {:.6g}, oracle {:.6g}\n", v.reduced.buggy, v.reduced.oracle);
    out += line("buggy-time ratio", v.buggy_ratio, v.buggy_band, v.buggy_ok);
    out += line("gap ratio", v.gap_ratio, v.gap_band, v.gap_ok);
    out += fmt::format("verdict: {}\n", v.pass() ? "pass" : "fail");
    return out;
}
}  // namespace warplens::reduce
