// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/bytes.hpp"
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warplens::dis
{
struct MachineInstr
{
    std::uint64_t address = 0;
    Bytes bytes;
    std::string mnemonic;
    std::string operands;
    bool operator==(const MachineInstr&) const = default;
};

struct DisassembledFunction
{
    std::uint32_t index = 0;  ///< module function index
    std::string symbol;
    std::uint64_t start = 0;
    std::vector<MachineInstr> instructions;
    bool operator==(const DisassembledFunction&) const = default;
};

struct Disassembly
{
    std::vector<DisassembledFunction> functions;  ///< sorted by index
    bool operator==(const Disassembly&) const = default;

    const DisassembledFunction* find(std::uint32_t index) const noexcept;
};

/// Accepts either the normalized line-delimited form produced by serialize()
/// or columnar disassembler text (`<symbol>:` headers followed by
/// `address: bytes  mnemonic operands` lines). Throws Error{DumpParseError}.
Disassembly parse_disassembly(std::string_view text);

/// Normalized form: one JSON object per line. A function header
/// `{"func":N,"symbol":S,"start":"0x.."}` precedes its instruction records
/// `{"func":N,"addr":"0x..","bytes":"..","mnemonic":M,"operands":O}`.
std::string serialize(const Disassembly& d);

/// Module function index implied by a runtime symbol name
/// (`function[N]`, `wasm-function[N]`, `funcN`, or trailing digits).
std::optional<std::uint32_t> function_index_from_symbol(std::string_view symbol);

/// Human-readable listing, one instruction per line: `addr: bytes  mnemonic operands`.
std::string render_listing(const Disassembly& d);
}  // namespace warplens::dis
