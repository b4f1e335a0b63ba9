// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/disassembly.hpp"
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace warplens::diff
{
inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct OpcodeSequence
{
    std::uint32_t function = 0;
    std::vector<std::string> mnemonics;
    std::vector<std::uint64_t> addresses;
};

/// Mnemonics with operands stripped, one sequence per function.
std::vector<OpcodeSequence> normalize_disassembly(const dis::Disassembly& d);

enum class EditKind : std::uint8_t
{
    Keep,
    Delete,  ///< present only in the original
    Insert,  ///< present only in the mutant
};

struct Edit
{
    EditKind kind = EditKind::Keep;
    std::string mnemonic;
    std::size_t a = npos;  ///< position in the original sequence
    std::size_t b = npos;  ///< position in the mutant sequence
    bool operator==(const Edit&) const = default;
};

struct EditScript
{
    std::vector<Edit> ops;
    std::size_t lcs_length = 0;
    std::size_t deletes() const noexcept;
    std::size_t inserts() const noexcept;
};

struct LcsOptions
{
    /// Largest DP table (cells) built directly; bigger problems split in linear space.
    std::size_t table_cells = std::size_t{1} << 22;
};

/// Maximal-LCS edit script. On equal subproblem values Keep wins, then Delete.
EditScript lcs_diff(std::span<const std::string> a, std::span<const std::string> b, const LcsOptions& opt = {});

/// LCS length in linear space.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Maximal run of non-Keep operations, as half-open ranges over EditScript::ops.
struct Region
{
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t context_begin = 0;  ///< up to three operations before `begin`
    std::size_t context_end = 0;    ///< up to three operations after `end`
    bool operator==(const Region&) const = default;
};

inline constexpr std::size_t kContext = 3;
std::vector<Region> find_regions(const EditScript& s, std::size_t context = kContext);

enum class Presence : std::uint8_t
{
    Both,
    OriginalOnly,
    MutantOnly,
};

struct FunctionDiff
{
    std::uint32_t function = 0;
    std::string symbol;
    std::size_t original_count = 0;
    std::size_t mutant_count = 0;
    std::uint64_t original_start = 0;
    std::uint64_t mutant_start = 0;
    Presence presence = Presence::Both;
    EditScript script;
    std::vector<Region> regions;
    /// Encoded bytes differ on some Keep pair.
    bool bytes_differ = false;
    std::vector<std::uint64_t> original_addresses;
    std::vector<std::uint64_t> mutant_addresses;

    bool address_delta() const noexcept { return presence == Presence::Both && original_start != mutant_start; }
    /// Identified machine instructions: original-side deletions.
    std::size_t identified() const noexcept { return script.deletes(); }
    bool changed() const noexcept { return !regions.empty() || bytes_differ || address_delta(); }
};

/// Pairs functions by index. Throws Error{UnpairableFunctions} when both sides
/// have functions but no index in common.
std::vector<FunctionDiff> isolate_slow_code(const dis::Disassembly& original, const dis::Disassembly& mutant,
                                            const LcsOptions& opt = {});

std::size_t total_identified(const std::vector<FunctionDiff>& diffs);

/// One JSON object per function: counts, starts, identified, flags.
std::string summary_jsonl(const std::vector<FunctionDiff>& diffs);
}  // namespace warplens::diff
