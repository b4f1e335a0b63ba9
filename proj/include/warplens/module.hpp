// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/bytes.hpp"
#include "warplens/opcodes.hpp"
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace warplens::wasm
{
enum class InstrCategory : std::uint8_t
{
    Operand,   ///< pushes one value, consumes none (const, local.get, global.get, fused const-address load)
    Operator,  ///< consumes at least one operand
    Control,
    Other,     ///< outside the mutation domain (SIMD, references, bulk memory, non-numeric locals)
};

std::string_view category_name(InstrCategory c) noexcept;

/// One decoded instruction. Which fields are meaningful depends on the
/// opcode's ImmKind; unused fields stay zero so equality is structural.
struct Instr
{
    Opcode op = op::nop;
    /// local/global/function/label/type/table/data/element index, memarg alignment, or lane.
    std::uint32_t idx = 0;
    /// call_indirect table, memarg memory index, second table/memory, or the lane of a lane access.
    std::uint32_t idx2 = 0;
    /// Constant bits (i32/f32 in the low 32 bits), memarg offset, or block type as signed s33.
    std::uint64_t imm = 0;
    /// br_table targets (default in idx) or typed-select value types.
    std::vector<std::uint32_t> list;
    /// v128.const / i8x16.shuffle payload.
    Bytes bytes;

    bool operator==(const Instr&) const = default;

    std::int32_t as_i32() const noexcept { return static_cast<std::int32_t>(static_cast<std::uint32_t>(imm)); }
    std::int64_t as_i64() const noexcept { return static_cast<std::int64_t>(imm); }
    float as_f32() const noexcept;
    double as_f64() const noexcept;
};

Instr make_i32_const(std::int32_t v);
Instr make_i64_const(std::int64_t v);
Instr make_f32_const(float v);
Instr make_f64_const(double v);
/// A `t.const` carrying raw bits for type t.
Instr make_const(ValType t, std::uint64_t bits);
Instr make_simple(Opcode op);
Instr make_indexed(Opcode op, std::uint32_t index);

struct InstrRecord
{
    Instr instr;
    std::size_t offset = 0;  ///< ordinal position within the function body
    InstrCategory category = InstrCategory::Other;
    /// Stack effect; Operand records have no params and exactly one result
    /// (fused const-address loads keep their [i32] -> [t] effect and set `fused`).
    std::optional<OperatorType> signature;
    bool fused = false;

    bool operator==(const InstrRecord&) const = default;
};

struct FuncType
{
    std::vector<ValType> params;
    std::vector<ValType> results;
    bool operator==(const FuncType&) const = default;
};

struct Limits
{
    std::uint8_t flags = 0;
    std::uint64_t min = 0;
    std::optional<std::uint64_t> max;
    bool operator==(const Limits&) const = default;
};

struct TableType
{
    ValType element = ValType::funcref;
    Limits limits;
    bool operator==(const TableType&) const = default;
};

struct GlobalType
{
    ValType type = ValType::i32;
    bool is_mutable = false;
    bool operator==(const GlobalType&) const = default;
};

enum class ExternKind : std::uint8_t
{
    Func = 0,
    Table = 1,
    Memory = 2,
    Global = 3,
};

struct Import
{
    std::string module;
    std::string name;
    ExternKind kind = ExternKind::Func;
    std::uint32_t type_index = 0;
    TableType table;
    Limits memory;
    GlobalType global;
    bool operator==(const Import&) const = default;
};

struct Global
{
    GlobalType type;
    std::vector<Instr> init;
    bool operator==(const Global&) const = default;
};

struct Export
{
    std::string name;
    ExternKind kind = ExternKind::Func;
    std::uint32_t index = 0;
    bool operator==(const Export&) const = default;
};

struct DataSegment
{
    std::uint32_t mode = 0;  ///< binary segment flag: 0 active memory 0, 1 passive, 2 active explicit memory
    std::uint32_t memory = 0;
    std::vector<Instr> offset;
    Bytes init;
    bool operator==(const DataSegment&) const = default;
};

struct LocalGroup
{
    std::uint32_t count = 0;
    ValType type = ValType::i32;
    bool operator==(const LocalGroup&) const = default;
};

struct FunctionBody
{
    std::uint32_t index = 0;  ///< module function index (imports first)
    std::uint32_t type_index = 0;
    std::vector<LocalGroup> local_groups;
    /// Parameters followed by declared locals.
    std::vector<ValType> locals;
    /// Body without the terminating `end`.
    std::vector<InstrRecord> instructions;
    bool is_mutable = true;
    std::string unsupported;  ///< non-empty when the body could not be decoded
    Bytes raw_code;           ///< undecoded expression bytes, only when `unsupported` is set

    bool operator==(const FunctionBody&) const = default;
};

struct CustomSection
{
    std::string name;
    Bytes payload;
    bool operator==(const CustomSection&) const = default;
};

struct RawSection
{
    std::uint8_t id = 0;
    Bytes payload;
    bool operator==(const RawSection&) const = default;
};

/// Indexed, classified view of a Wasm module.
struct Module
{
    std::vector<FuncType> types;
    std::vector<Import> imports;
    std::vector<std::uint32_t> function_types;  ///< type index per defined function
    std::vector<TableType> tables;
    std::vector<Limits> memories;
    std::vector<Global> globals;
    std::vector<Export> exports;
    std::optional<std::uint32_t> start;
    std::optional<Bytes> elements;  ///< element section payload, kept verbatim
    std::optional<std::uint32_t> data_count;
    std::vector<FunctionBody> functions;
    std::vector<DataSegment> data;
    std::vector<CustomSection> customs;
    std::vector<RawSection> opaque;  ///< sections from proposals the model does not decode
    /// UnsupportedFeature notes collected while parsing.
    std::vector<std::string> diagnostics;

    bool operator==(const Module& other) const
    {
        return types == other.types && imports == other.imports &&
               function_types == other.function_types && tables == other.tables &&
               memories == other.memories && globals == other.globals &&
               exports == other.exports && start == other.start && elements == other.elements &&
               data_count == other.data_count && functions == other.functions &&
               data == other.data && customs == other.customs && opaque == other.opaque;
    }

    std::uint32_t imported_function_count() const noexcept;
    std::uint32_t function_count() const noexcept;
    /// Signature of any function by module index.
    const FuncType& function_type(std::uint32_t func_index) const;
    /// Type of any global (imported or defined) by module index.
    GlobalType global_type(std::uint32_t global_index) const;
    std::uint32_t global_count() const noexcept;
    const FunctionBody* find_function(std::uint32_t func_index) const noexcept;
    FunctionBody* find_function(std::uint32_t func_index) noexcept;
    std::optional<std::uint32_t> exported_function(std::string_view name) const noexcept;
};

/// Decodes a Wasm binary. Throws Error{MalformedBinary}; constructs outside
/// the decoded set are recorded in `diagnostics` and leave their function
/// non-mutable.
Module parse_module(ByteView bytes);

/// Re-encodes the model. Throws Error{EncodeOverflow} on immediates or
/// indices that cannot be represented.
Bytes encode_module(const Module& module);

InstrCategory classify_instruction(const InstrRecord& record) noexcept;

/// (Re)computes offsets, categories, and signatures of every record of `body`.
void classify_function(const Module& module, FunctionBody& body);

std::string instr_text(const Instr& instr);

/// Decodes one instruction; returns nullopt for opcodes outside the supported set.
std::optional<Instr> read_instr(ByteReader& in);
void write_instr(Bytes& out, const Instr& instr);
}  // namespace warplens::wasm
