// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace warplens
{
enum class Errc
{
    MalformedBinary,
    UnsupportedFeature,
    EncodeOverflow,
    NoCandidates,
    IllegalSpan,
    SpawnFailure,
    DumpUnsupported,
    DumpParseError,
    NonPositiveRatio,
    ZeroTiming,
    UnpairableFunctions,
    OutputUnwritable,
    MeasurementFailure,
    Trap,
    StepBudgetExceeded,
    ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the library carries one of the Errc kinds so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string& message)
      : std::runtime_error{std::string{errc_name(code)} + ": " + message}, code_{code}
    {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};
}  // namespace warplens
