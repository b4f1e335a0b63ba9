// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace warplens::wasm
{
/// Binary value-type codes. Only the four numeric kinds are mutable; the
/// others are tracked so modules using them still parse and validate.
enum class ValType : std::uint8_t
{
    i32 = 0x7f,
    i64 = 0x7e,
    f32 = 0x7d,
    f64 = 0x7c,
    v128 = 0x7b,
    funcref = 0x70,
    externref = 0x6f,
};

constexpr bool is_numeric(ValType t) noexcept
{
    return t == ValType::i32 || t == ValType::i64 || t == ValType::f32 || t == ValType::f64;
}

constexpr bool is_reference(ValType t) noexcept
{
    return t == ValType::funcref || t == ValType::externref;
}

std::optional<ValType> valtype_from_byte(std::uint8_t b) noexcept;
std::string_view valtype_name(ValType t) noexcept;

/// Packed opcode: single-byte opcodes as-is, prefixed ones as (prefix << 16) | sub.
using Opcode = std::uint32_t;

constexpr Opcode prefixed(std::uint8_t prefix, std::uint32_t sub) noexcept
{
    return (Opcode{prefix} << 16) | sub;
}

namespace op
{
inline constexpr Opcode unreachable = 0x00;
inline constexpr Opcode nop = 0x01;
inline constexpr Opcode block = 0x02;
inline constexpr Opcode loop = 0x03;
inline constexpr Opcode if_ = 0x04;
inline constexpr Opcode else_ = 0x05;
inline constexpr Opcode end = 0x0b;
inline constexpr Opcode br = 0x0c;
inline constexpr Opcode br_if = 0x0d;
inline constexpr Opcode br_table = 0x0e;
inline constexpr Opcode return_ = 0x0f;
inline constexpr Opcode call = 0x10;
inline constexpr Opcode call_indirect = 0x11;
inline constexpr Opcode return_call = 0x12;
inline constexpr Opcode return_call_indirect = 0x13;
inline constexpr Opcode drop = 0x1a;
inline constexpr Opcode select = 0x1b;
inline constexpr Opcode select_t = 0x1c;
inline constexpr Opcode local_get = 0x20;
inline constexpr Opcode local_set = 0x21;
inline constexpr Opcode local_tee = 0x22;
inline constexpr Opcode global_get = 0x23;
inline constexpr Opcode global_set = 0x24;
inline constexpr Opcode table_get = 0x25;
inline constexpr Opcode table_set = 0x26;
inline constexpr Opcode i32_load = 0x28;
inline constexpr Opcode i64_load = 0x29;
inline constexpr Opcode f32_load = 0x2a;
inline constexpr Opcode f64_load = 0x2b;
inline constexpr Opcode i64_load32_u = 0x35;
inline constexpr Opcode i32_store = 0x36;
inline constexpr Opcode i64_store32 = 0x3e;
inline constexpr Opcode memory_size = 0x3f;
inline constexpr Opcode memory_grow = 0x40;
inline constexpr Opcode i32_const = 0x41;
inline constexpr Opcode i64_const = 0x42;
inline constexpr Opcode f32_const = 0x43;
inline constexpr Opcode f64_const = 0x44;
inline constexpr Opcode i32_add = 0x6a;
inline constexpr Opcode i32_sub = 0x6b;
inline constexpr Opcode i64_add = 0x7c;
inline constexpr Opcode i64_sub = 0x7d;
inline constexpr Opcode i64_div_u = 0x80;
inline constexpr Opcode ref_null = 0xd0;
inline constexpr Opcode ref_is_null = 0xd1;
inline constexpr Opcode ref_func = 0xd2;
inline constexpr Opcode prefix_fc = 0xfc;
inline constexpr Opcode prefix_simd = 0xfd;
}  // namespace op

/// How an opcode's immediates are laid out in the binary.
enum class ImmKind : std::uint8_t
{
    None,
    BlockType,
    Label,
    LabelTable,
    Func,
    CallIndirect,  ///< type index, table index
    Local,
    Global,
    Table,
    MemArg,
    MemIndex,  ///< memory.size / memory.grow reserved memory byte
    I32,
    I64,
    F32,
    F64,
    SelectTypes,
    HeapType,
    MemoryInit,  ///< data index, memory index
    Data,
    MemoryCopy,
    MemoryFill,
    TableInit,  ///< element index, table index
    Elem,
    TableCopy,
    V128,
    Shuffle,
    Lane,
    MemArgLane,
};

/// Coarse opcode family used by classification, mutation, and the interpreter.
enum class OpClass : std::uint8_t
{
    Control,     ///< block structure, branches, calls, select/drop/nop
    Const,       ///< t.const
    LocalGet,
    LocalSet,
    LocalTee,
    GlobalGet,
    GlobalSet,
    Load,        ///< scalar memory load, [i32] -> [t]
    Store,       ///< scalar memory store, [i32 t] -> []
    Numeric,     ///< pure numeric operator with a fixed signature
    Other,       ///< memory/table/ref/SIMD operations outside the mutation domain
};

/// [params] -> [results]; substitution compatibility is element-wise equality.
struct OperatorType
{
    std::vector<ValType> params;
    std::vector<ValType> results;

    bool operator==(const OperatorType&) const = default;
};

struct OpInfo
{
    Opcode code;
    std::string_view name;
    ImmKind imm;
    OpClass cls;
    /// Fixed stack signature for Numeric/Load/Store/Const ops; empty for the rest.
    std::string_view params;
    std::string_view results;
    /// Natural alignment exponent for memory accesses.
    std::uint8_t natural_align = 0;
};

/// Lookup by packed opcode; nullptr for opcodes outside the supported set.
const OpInfo* op_info(Opcode code) noexcept;
const OpInfo* op_info(std::string_view name) noexcept;

/// All supported scalar opcodes in core-spec numbering order.
std::span<const OpInfo> scalar_opcodes() noexcept;

/// The static signature of a table entry (decodes the compact type strings).
OperatorType static_signature(const OpInfo& info);

std::string opcode_name(Opcode code);

/// All numeric operators whose signature equals `sig`, in opcode order.
std::vector<Opcode> substitution_group(const OperatorType& sig);
}  // namespace warplens::wasm
