// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/bytes.hpp"
#include <cstddef>
#include <optional>
#include <string>

namespace warplens::wasm
{
/// Outcome of validating a binary. On reject, `rule` names the first failing
/// check and `offset` points at the byte where it was detected.
struct ValidationResult
{
    bool ok = true;
    std::string rule;
    std::string message;
    std::size_t offset = 0;
    std::optional<std::uint32_t> function;

    explicit operator bool() const noexcept { return ok; }
    std::string describe() const;
};

/// Structural and type validation of a core Wasm binary (MVP plus the
/// sign-extension, saturating-conversion, bulk-memory, reference-types,
/// multi-value, and fixed-width SIMD extensions). Decodes the bytes on its
/// own; shares nothing with parse_module beyond the LEB reader.
ValidationResult validate_module(ByteView bytes);
}  // namespace warplens::wasm
