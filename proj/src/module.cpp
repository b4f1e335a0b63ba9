// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/module.hpp"
#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace warplens
{
std::string_view errc_name(Errc code) noexcept
{
    switch (code)
    {
    case Errc::MalformedBinary:
        return "MalformedBinary";
    case Errc::UnsupportedFeature:
        return "UnsupportedFeature";
    case Errc::EncodeOverflow:
        return "EncodeOverflow";
    case Errc::NoCandidates:
        return "NoCandidates";
    case Errc::IllegalSpan:
        return "IllegalSpan";
    case Errc::SpawnFailure:
        return "SpawnFailure";
    case Errc::DumpUnsupported:
        return "DumpUnsupported";
    case Errc::DumpParseError:
        return "DumpParseError";
    case Errc::NonPositiveRatio:
        return "NonPositiveRatio";
    case Errc::ZeroTiming:
        return "ZeroTiming";
    case Errc::UnpairableFunctions:
        return "UnpairableFunctions";
    case Errc::OutputUnwritable:
        return "OutputUnwritable";
    case Errc::MeasurementFailure:
        return "MeasurementFailure";
    case Errc::Trap:
        return "Trap";
    case Errc::StepBudgetExceeded:
        return "StepBudgetExceeded";
    case Errc::ConfigError:
        return "ConfigError";
    }
    return "Error";
}
}  // namespace warplens

namespace warplens::wasm
{
namespace
{
constexpr std::uint8_t kHeader[] = {0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};

ValType read_valtype(ByteReader& in)
{
    const auto t = valtype_from_byte(in.u8());
    if (!t)
        in.fail("invalid value type");
    return *t;
}

std::vector<ValType> read_valtypes(ByteReader& in)
{
    const auto n = in.u32();
    std::vector<ValType> out;
    out.reserve(std::min<std::uint32_t>(n, 1024));
    for (std::uint32_t i = 0; i < n; ++i)
        out.push_back(read_valtype(in));
    return out;
}

Limits read_limits(ByteReader& in)
{
    Limits l;
    l.flags = in.u8();
    if (l.flags > 0x07)
        in.fail("invalid limits flags");
    const bool wide = (l.flags & 0x04) != 0;
    l.min = wide ? in.u64() : in.u32();
    if (l.flags & 0x01)
        l.max = wide ? in.u64() : in.u32();
    return l;
}

TableType read_table_type(ByteReader& in)
{
    TableType t;
    t.element = read_valtype(in);
    if (!is_reference(t.element))
        in.fail("table element type must be a reference type");
    t.limits = read_limits(in);
    return t;
}

GlobalType read_global_type(ByteReader& in)
{
    GlobalType g;
    g.type = read_valtype(in);
    const auto m = in.u8();
    if (m > 1)
        in.fail("invalid global mutability");
    g.is_mutable = m == 1;
    return g;
}

std::vector<Instr> read_const_expr(ByteReader& in)
{
    std::vector<Instr> out;
    while (true)
    {
        auto instr = read_instr(in);
        if (!instr)
            in.fail("unsupported instruction in constant expression");
        if (instr->op == op::end)
            return out;
        out.push_back(std::move(*instr));
    }
}

FunctionBody parse_code_entry(ByteView entry, std::size_t base, std::uint32_t func_index,
    std::uint32_t type_index, const FuncType& type, std::vector<std::string>& diagnostics)
{
    FunctionBody body;
    body.index = func_index;
    body.type_index = type_index;
    body.locals = type.params;

    ByteReader in{entry, base};
    const auto group_count = in.u32();
    std::uint64_t total = 0;
    for (std::uint32_t i = 0; i < group_count; ++i)
    {
        LocalGroup g;
        g.count = in.u32();
        g.type = read_valtype(in);
        total += g.count;
        if (total > 50000)
            in.fail("too many locals");
        body.local_groups.push_back(g);
        body.locals.insert(body.locals.end(), g.count, g.type);
    }

    const auto expr_start = in.pos();
    std::size_t depth = 0;
    while (true)
    {
        const auto at = in.offset();
        auto instr = read_instr(in);
        if (!instr)
        {
            char buf[112];
            std::snprintf(buf, sizeof buf, "function %u: unsupported opcode at offset %zu",
                func_index, at);
            body.unsupported = buf;
            body.is_mutable = false;
            body.instructions.clear();
            const auto expr = entry.subspan(expr_start);
            body.raw_code.assign(expr.begin(), expr.end());
            diagnostics.push_back(body.unsupported);
            return body;
        }
        if (instr->op == op::end)
        {
            if (depth == 0)
            {
                if (!in.eof())
                    in.fail("trailing bytes after function end");
                return body;
            }
            --depth;
        }
        else if (instr->op == op::block || instr->op == op::loop || instr->op == op::if_)
        {
            ++depth;
        }
        InstrRecord rec;
        rec.instr = std::move(*instr);
        body.instructions.push_back(std::move(rec));
    }
}

void put_valtypes(Bytes& out, const std::vector<ValType>& types)
{
    put_uleb(out, types.size());
    for (const auto t : types)
        out.push_back(static_cast<std::uint8_t>(t));
}

void put_limits(Bytes& out, const Limits& l)
{
    const bool wide = (l.flags & 0x04) != 0;
    const auto check = [wide](std::uint64_t v) {
        if (!wide && v > std::numeric_limits<std::uint32_t>::max())
            throw Error{Errc::EncodeOverflow, "limits value exceeds 32 bits"};
    };
    out.push_back(l.flags);
    check(l.min);
    put_uleb(out, l.min);
    if (l.flags & 0x01)
    {
        if (!l.max)
            throw Error{Errc::EncodeOverflow, "limits flag requires a maximum"};
        check(*l.max);
        put_uleb(out, *l.max);
    }
}

void put_const_expr(Bytes& out, const std::vector<Instr>& expr)
{
    for (const auto& i : expr)
        write_instr(out, i);
    out.push_back(static_cast<std::uint8_t>(op::end));
}

void check_u32(std::size_t v, const char* what)
{
    if (v > std::numeric_limits<std::uint32_t>::max())
        throw Error{Errc::EncodeOverflow, std::string{what} + " exceeds 32 bits"};
}

// Canonical section position, used to place opaque sections on encode.
int section_rank(std::uint8_t id) noexcept
{
    constexpr int ranks[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 12, 13, 11, 6};
    return id < std::size(ranks) ? ranks[id] : 99;
}

std::string format_float(double v, bool single)
{
    if (std::isnan(v))
        return std::signbit(v) ? "-nan" : "nan";
    if (std::isinf(v))
        return v < 0 ? "-inf" : "inf";
    char buf[64];
    const auto res = single ? std::to_chars(buf, buf + sizeof buf, static_cast<float>(v))
                            : std::to_chars(buf, buf + sizeof buf, v);
    std::string s{buf, res.ptr};
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}
}  // namespace

float Instr::as_f32() const noexcept
{
    return std::bit_cast<float>(static_cast<std::uint32_t>(imm));
}

double Instr::as_f64() const noexcept
{
    return std::bit_cast<double>(imm);
}

Instr make_i32_const(std::int32_t v)
{
    return make_const(ValType::i32, static_cast<std::uint32_t>(v));
}

Instr make_i64_const(std::int64_t v)
{
    return make_const(ValType::i64, static_cast<std::uint64_t>(v));
}

Instr make_f32_const(float v)
{
    return make_const(ValType::f32, std::bit_cast<std::uint32_t>(v));
}

Instr make_f64_const(double v)
{
    return make_const(ValType::f64, std::bit_cast<std::uint64_t>(v));
}

Instr make_const(ValType t, std::uint64_t bits)
{
    Instr i;
    switch (t)
    {
    case ValType::i32:
        i.op = op::i32_const;
        i.imm = bits & 0xffffffffu;
        break;
    case ValType::i64:
        i.op = op::i64_const;
        i.imm = bits;
        break;
    case ValType::f32:
        i.op = op::f32_const;
        i.imm = bits & 0xffffffffu;
        break;
    case ValType::f64:
        i.op = op::f64_const;
        i.imm = bits;
        break;
    default:
        throw Error{Errc::UnsupportedFeature, "no constant instruction for non-numeric type"};
    }
    return i;
}

Instr make_simple(Opcode code)
{
    Instr i;
    i.op = code;
    return i;
}

Instr make_indexed(Opcode code, std::uint32_t index)
{
    Instr i;
    i.op = code;
    i.idx = index;
    return i;
}

std::string_view category_name(InstrCategory c) noexcept
{
    switch (c)
    {
    case InstrCategory::Operand:
        return "operand";
    case InstrCategory::Operator:
        return "operator";
    case InstrCategory::Control:
        return "control";
    case InstrCategory::Other:
        return "other";
    }
    return "?";
}

std::optional<Instr> read_instr(ByteReader& in)
{
    Instr instr;
    const std::uint8_t first = in.u8();
    Opcode code = first;
    if (first == op::prefix_fc || first == op::prefix_simd)
        code = prefixed(first, in.u32());
    const OpInfo* info = op_info(code);
    if (info == nullptr)
        return std::nullopt;
    instr.op = code;

    const auto read_memarg = [&] {
        instr.idx = in.u32();
        if (instr.idx & 0x40)
            instr.idx2 = in.u32();
        instr.imm = in.u64();
    };

    switch (info->imm)
    {
    case ImmKind::None:
        break;
    case ImmKind::BlockType:
        instr.imm = static_cast<std::uint64_t>(in.s33());
        break;
    case ImmKind::Label:
    case ImmKind::Func:
    case ImmKind::Local:
    case ImmKind::Global:
    case ImmKind::Table:
    case ImmKind::Data:
    case ImmKind::Elem:
    case ImmKind::MemoryFill:
    case ImmKind::MemIndex:
        instr.idx = in.u32();
        break;
    case ImmKind::LabelTable:
    {
        const auto n = in.u32();
        instr.list.reserve(std::min<std::uint32_t>(n, 4096));
        for (std::uint32_t i = 0; i < n; ++i)
            instr.list.push_back(in.u32());
        instr.idx = in.u32();
        break;
    }
    case ImmKind::CallIndirect:
    case ImmKind::MemoryInit:
    case ImmKind::MemoryCopy:
    case ImmKind::TableInit:
    case ImmKind::TableCopy:
        instr.idx = in.u32();
        instr.idx2 = in.u32();
        break;
    case ImmKind::MemArg:
        read_memarg();
        break;
    case ImmKind::MemArgLane:
        read_memarg();
        instr.bytes.push_back(in.u8());
        break;
    case ImmKind::I32:
        instr.imm = static_cast<std::uint32_t>(in.s32());
        break;
    case ImmKind::I64:
        instr.imm = static_cast<std::uint64_t>(in.s64());
        break;
    case ImmKind::F32:
        instr.imm = in.fixed_u32();
        break;
    case ImmKind::F64:
        instr.imm = in.fixed_u64();
        break;
    case ImmKind::SelectTypes:
    {
        const auto n = in.u32();
        for (std::uint32_t i = 0; i < n; ++i)
        {
            const auto b = in.u8();
            if (!valtype_from_byte(b))
                in.fail("invalid value type");
            instr.list.push_back(b);
        }
        break;
    }
    case ImmKind::HeapType:
        instr.idx = in.u8();
        break;
    case ImmKind::V128:
    case ImmKind::Shuffle:
    {
        const auto b = in.take(16);
        instr.bytes.assign(b.begin(), b.end());
        break;
    }
    case ImmKind::Lane:
        instr.idx = in.u8();
        break;
    }
    return instr;
}

void write_instr(Bytes& out, const Instr& instr)
{
    const OpInfo* info = op_info(instr.op);
    if (info == nullptr)
        throw Error{Errc::EncodeOverflow, "cannot encode unknown opcode " + opcode_name(instr.op)};
    if (instr.op > 0xff)
    {
        out.push_back(static_cast<std::uint8_t>(instr.op >> 16));
        put_uleb(out, instr.op & 0xffff);
    }
    else
    {
        out.push_back(static_cast<std::uint8_t>(instr.op));
    }

    const auto put_memarg = [&] {
        put_uleb(out, instr.idx);
        if (instr.idx & 0x40)
            put_uleb(out, instr.idx2);
        put_uleb(out, instr.imm);
    };

    switch (info->imm)
    {
    case ImmKind::None:
        break;
    case ImmKind::BlockType:
    {
        const auto bt = static_cast<std::int64_t>(instr.imm);
        if (bt < -(std::int64_t{1} << 32) || bt >= (std::int64_t{1} << 32))
            throw Error{Errc::EncodeOverflow, "block type out of s33 range"};
        put_sleb(out, bt);
        break;
    }
    case ImmKind::Label:
    case ImmKind::Func:
    case ImmKind::Local:
    case ImmKind::Global:
    case ImmKind::Table:
    case ImmKind::Data:
    case ImmKind::Elem:
    case ImmKind::MemoryFill:
    case ImmKind::MemIndex:
        put_uleb(out, instr.idx);
        break;
    case ImmKind::LabelTable:
        put_uleb(out, instr.list.size());
        for (const auto t : instr.list)
            put_uleb(out, t);
        put_uleb(out, instr.idx);
        break;
    case ImmKind::CallIndirect:
    case ImmKind::MemoryInit:
    case ImmKind::MemoryCopy:
    case ImmKind::TableInit:
    case ImmKind::TableCopy:
        put_uleb(out, instr.idx);
        put_uleb(out, instr.idx2);
        break;
    case ImmKind::MemArg:
        put_memarg();
        break;
    case ImmKind::MemArgLane:
        put_memarg();
        if (instr.bytes.size() != 1)
            throw Error{Errc::EncodeOverflow, "lane access requires one lane byte"};
        out.push_back(instr.bytes[0]);
        break;
    case ImmKind::I32:
        if (instr.imm > 0xffffffffu)
            throw Error{Errc::EncodeOverflow, "i32 immediate exceeds 32 bits"};
        put_sleb(out, instr.as_i32());
        break;
    case ImmKind::I64:
        put_sleb(out, instr.as_i64());
        break;
    case ImmKind::F32:
        if (instr.imm > 0xffffffffu)
            throw Error{Errc::EncodeOverflow, "f32 immediate exceeds 32 bits"};
        put_fixed(out, instr.imm, 4);
        break;
    case ImmKind::F64:
        put_fixed(out, instr.imm, 8);
        break;
    case ImmKind::SelectTypes:
        put_uleb(out, instr.list.size());
        for (const auto t : instr.list)
        {
            if (t > 0xff)
                throw Error{Errc::EncodeOverflow, "select type out of range"};
            out.push_back(static_cast<std::uint8_t>(t));
        }
        break;
    case ImmKind::HeapType:
    case ImmKind::Lane:
        if (instr.idx > 0xff)
            throw Error{Errc::EncodeOverflow, "byte immediate out of range"};
        out.push_back(static_cast<std::uint8_t>(instr.idx));
        break;
    case ImmKind::V128:
    case ImmKind::Shuffle:
        if (instr.bytes.size() != 16)
            throw Error{Errc::EncodeOverflow, "v128 immediate must be 16 bytes"};
        out.insert(out.end(), instr.bytes.begin(), instr.bytes.end());
        break;
    }
}

std::uint32_t Module::imported_function_count() const noexcept
{
    return static_cast<std::uint32_t>(std::count_if(imports.begin(), imports.end(),
        [](const Import& i) { return i.kind == ExternKind::Func; }));
}

std::uint32_t Module::function_count() const noexcept
{
    return imported_function_count() + static_cast<std::uint32_t>(function_types.size());
}

const FuncType& Module::function_type(std::uint32_t func_index) const
{
    std::uint32_t seen = 0;
    for (const auto& imp : imports)
    {
        if (imp.kind != ExternKind::Func)
            continue;
        if (seen++ == func_index)
            return types.at(imp.type_index);
    }
    return types.at(function_types.at(func_index - seen));
}

GlobalType Module::global_type(std::uint32_t global_index) const
{
    std::uint32_t seen = 0;
    for (const auto& imp : imports)
    {
        if (imp.kind != ExternKind::Global)
            continue;
        if (seen++ == global_index)
            return imp.global;
    }
    return globals.at(global_index - seen).type;
}

std::uint32_t Module::global_count() const noexcept
{
    const auto imported = std::count_if(imports.begin(), imports.end(),
        [](const Import& i) { return i.kind == ExternKind::Global; });
    return static_cast<std::uint32_t>(imported + globals.size());
}

const FunctionBody* Module::find_function(std::uint32_t func_index) const noexcept
{
    for (const auto& f : functions)
        if (f.index == func_index)
            return &f;
    return nullptr;
}

FunctionBody* Module::find_function(std::uint32_t func_index) noexcept
{
    for (auto& f : functions)
        if (f.index == func_index)
            return &f;
    return nullptr;
}

std::optional<std::uint32_t> Module::exported_function(std::string_view name) const noexcept
{
    for (const auto& e : exports)
        if (e.kind == ExternKind::Func && e.name == name)
            return e.index;
    return std::nullopt;
}

Module parse_module(ByteView bytes)
{
    ByteReader in{bytes};
    if (bytes.size() < sizeof kHeader || !std::equal(std::begin(kHeader), std::end(kHeader), bytes.begin()))
        throw Error{Errc::MalformedBinary, "missing Wasm magic/version header"};
    in.take(sizeof kHeader);

    Module m;
    std::vector<std::pair<std::size_t, ByteView>> code_entries;
    bool seen[14] = {};
    while (!in.eof())
    {
        const auto id = in.u8();
        const auto size = in.u32();
        const auto section_base = in.offset();
        ByteReader s{in.take(size), section_base};
        if (id > 13)
            s.fail("unknown section id " + std::to_string(id));
        if (id != 0)
        {
            if (seen[id])
                s.fail("duplicate section id " + std::to_string(id));
            seen[id] = true;
        }

        switch (id)
        {
        case 0:
        {
            CustomSection c;
            c.name = s.name();
            const auto rest = s.take(s.remaining());
            c.payload.assign(rest.begin(), rest.end());
            m.customs.push_back(std::move(c));
            break;
        }
        case 1:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
            {
                if (s.u8() != 0x60)
                    s.fail("unsupported type form");
                FuncType t;
                t.params = read_valtypes(s);
                t.results = read_valtypes(s);
                m.types.push_back(std::move(t));
            }
            break;
        }
        case 2:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
            {
                Import imp;
                imp.module = s.name();
                imp.name = s.name();
                const auto kind = s.u8();
                switch (kind)
                {
                case 0:
                    imp.kind = ExternKind::Func;
                    imp.type_index = s.u32();
                    break;
                case 1:
                    imp.kind = ExternKind::Table;
                    imp.table = read_table_type(s);
                    break;
                case 2:
                    imp.kind = ExternKind::Memory;
                    imp.memory = read_limits(s);
                    break;
                case 3:
                    imp.kind = ExternKind::Global;
                    imp.global = read_global_type(s);
                    break;
                default:
                    s.fail("unsupported import kind");
                }
                m.imports.push_back(std::move(imp));
            }
            break;
        }
        case 3:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
                m.function_types.push_back(s.u32());
            break;
        }
        case 4:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
                m.tables.push_back(read_table_type(s));
            break;
        }
        case 5:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
                m.memories.push_back(read_limits(s));
            break;
        }
        case 6:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
            {
                Global g;
                g.type = read_global_type(s);
                g.init = read_const_expr(s);
                m.globals.push_back(std::move(g));
            }
            break;
        }
        case 7:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
            {
                Export e;
                e.name = s.name();
                const auto kind = s.u8();
                if (kind > 3)
                    s.fail("unsupported export kind");
                e.kind = static_cast<ExternKind>(kind);
                e.index = s.u32();
                m.exports.push_back(std::move(e));
            }
            break;
        }
        case 8:
            m.start = s.u32();
            break;
        case 9:
        {
            const auto rest = s.take(s.remaining());
            m.elements = Bytes{rest.begin(), rest.end()};
            break;
        }
        case 10:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
            {
                const auto len = s.u32();
                const auto base = s.offset();
                code_entries.emplace_back(base, s.take(len));
            }
            break;
        }
        case 11:
        {
            const auto n = s.u32();
            for (std::uint32_t i = 0; i < n; ++i)
            {
                DataSegment d;
                d.mode = s.u32();
                if (d.mode > 2)
                    s.fail("invalid data segment flags");
                if (d.mode == 2)
                    d.memory = s.u32();
                if (d.mode != 1)
                    d.offset = read_const_expr(s);
                const auto len = s.u32();
                const auto b = s.take(len);
                d.init.assign(b.begin(), b.end());
                m.data.push_back(std::move(d));
            }
            break;
        }
        case 12:
            m.data_count = s.u32();
            break;
        case 13:
        {
            const auto rest = s.take(s.remaining());
            m.opaque.push_back({id, Bytes{rest.begin(), rest.end()}});
            m.diagnostics.push_back("tag section is not decoded");
            break;
        }
        }
        if (!s.eof())
            s.fail("section size mismatch");
    }

    if (code_entries.size() != m.function_types.size())
        throw Error{Errc::MalformedBinary, "function and code section counts differ"};

    const auto imported = m.imported_function_count();
    for (std::size_t i = 0; i < code_entries.size(); ++i)
    {
        const auto type_index = m.function_types[i];
        if (type_index >= m.types.size())
            throw Error{Errc::MalformedBinary, "function type index out of range"};
        auto body = parse_code_entry(code_entries[i].second, code_entries[i].first,
            imported + static_cast<std::uint32_t>(i), type_index, m.types[type_index], m.diagnostics);
        m.functions.push_back(std::move(body));
    }
    for (auto& f : m.functions)
        classify_function(m, f);
    return m;
}

Bytes encode_module(const Module& m)
{
    std::vector<std::pair<std::uint8_t, Bytes>> sections;

    if (!m.types.empty())
    {
        Bytes p;
        put_uleb(p, m.types.size());
        for (const auto& t : m.types)
        {
            p.push_back(0x60);
            put_valtypes(p, t.params);
            put_valtypes(p, t.results);
        }
        sections.emplace_back(1, std::move(p));
    }
    if (!m.imports.empty())
    {
        Bytes p;
        put_uleb(p, m.imports.size());
        for (const auto& imp : m.imports)
        {
            put_name(p, imp.module);
            put_name(p, imp.name);
            p.push_back(static_cast<std::uint8_t>(imp.kind));
            switch (imp.kind)
            {
            case ExternKind::Func:
                put_uleb(p, imp.type_index);
                break;
            case ExternKind::Table:
                p.push_back(static_cast<std::uint8_t>(imp.table.element));
                put_limits(p, imp.table.limits);
                break;
            case ExternKind::Memory:
                put_limits(p, imp.memory);
                break;
            case ExternKind::Global:
                p.push_back(static_cast<std::uint8_t>(imp.global.type));
                p.push_back(imp.global.is_mutable ? 1 : 0);
                break;
            }
        }
        sections.emplace_back(2, std::move(p));
    }
    if (!m.function_types.empty())
    {
        Bytes p;
        put_uleb(p, m.function_types.size());
        for (const auto t : m.function_types)
            put_uleb(p, t);
        sections.emplace_back(3, std::move(p));
    }
    if (!m.tables.empty())
    {
        Bytes p;
        put_uleb(p, m.tables.size());
        for (const auto& t : m.tables)
        {
            p.push_back(static_cast<std::uint8_t>(t.element));
            put_limits(p, t.limits);
        }
        sections.emplace_back(4, std::move(p));
    }
    if (!m.memories.empty())
    {
        Bytes p;
        put_uleb(p, m.memories.size());
        for (const auto& l : m.memories)
            put_limits(p, l);
        sections.emplace_back(5, std::move(p));
    }
    if (!m.globals.empty())
    {
        Bytes p;
        put_uleb(p, m.globals.size());
        for (const auto& g : m.globals)
        {
            p.push_back(static_cast<std::uint8_t>(g.type.type));
            p.push_back(g.type.is_mutable ? 1 : 0);
            put_const_expr(p, g.init);
        }
        sections.emplace_back(6, std::move(p));
    }
    if (!m.exports.empty())
    {
        Bytes p;
        put_uleb(p, m.exports.size());
        for (const auto& e : m.exports)
        {
            put_name(p, e.name);
            p.push_back(static_cast<std::uint8_t>(e.kind));
            put_uleb(p, e.index);
        }
        sections.emplace_back(7, std::move(p));
    }
    if (m.start)
    {
        Bytes p;
        put_uleb(p, *m.start);
        sections.emplace_back(8, std::move(p));
    }
    if (m.elements)
        sections.emplace_back(9, *m.elements);
    if (m.data_count)
    {
        Bytes p;
        put_uleb(p, *m.data_count);
        sections.emplace_back(12, std::move(p));
    }
    if (!m.functions.empty())
    {
        Bytes p;
        put_uleb(p, m.functions.size());
        for (const auto& f : m.functions)
        {
            Bytes body;
            put_uleb(body, f.local_groups.size());
            for (const auto& g : f.local_groups)
            {
                put_uleb(body, g.count);
                body.push_back(static_cast<std::uint8_t>(g.type));
            }
            if (!f.unsupported.empty())
            {
                body.insert(body.end(), f.raw_code.begin(), f.raw_code.end());
            }
            else
            {
                for (const auto& rec : f.instructions)
                    write_instr(body, rec.instr);
                body.push_back(static_cast<std::uint8_t>(op::end));
            }
            check_u32(body.size(), "function body size");
            put_uleb(p, body.size());
            p.insert(p.end(), body.begin(), body.end());
        }
        sections.emplace_back(10, std::move(p));
    }
    if (!m.data.empty())
    {
        Bytes p;
        put_uleb(p, m.data.size());
        for (const auto& d : m.data)
        {
            put_uleb(p, d.mode);
            if (d.mode == 2)
                put_uleb(p, d.memory);
            if (d.mode != 1)
                put_const_expr(p, d.offset);
            put_uleb(p, d.init.size());
            p.insert(p.end(), d.init.begin(), d.init.end());
        }
        sections.emplace_back(11, std::move(p));
    }
    for (const auto& raw : m.opaque)
        sections.emplace_back(raw.id, raw.payload);

    std::stable_sort(sections.begin(), sections.end(),
        [](const auto& a, const auto& b) { return section_rank(a.first) < section_rank(b.first); });

    Bytes out{std::begin(kHeader), std::end(kHeader)};
    for (const auto& [id, payload] : sections)
    {
        check_u32(payload.size(), "section size");
        put_section(out, id, payload);
    }
    for (const auto& c : m.customs)
    {
        Bytes p;
        put_name(p, c.name);
        p.insert(p.end(), c.payload.begin(), c.payload.end());
        put_section(out, 0, p);
    }
    return out;
}

InstrCategory classify_instruction(const InstrRecord& record) noexcept
{
    return record.category;
}

void classify_function(const Module& module, FunctionBody& body)
{
    const auto global_count = module.global_count();
    for (std::size_t i = 0; i < body.instructions.size(); ++i)
    {
        auto& rec = body.instructions[i];
        rec.offset = i;
        rec.category = InstrCategory::Other;
        rec.signature.reset();
        rec.fused = false;

        const OpInfo* info = op_info(rec.instr.op);
        if (info == nullptr)
            continue;

        const auto operand = [&rec](ValType t) {
            rec.category = InstrCategory::Operand;
            rec.signature = OperatorType{{}, {t}};
        };
        const auto operator_ = [&rec](OperatorType sig) {
            rec.category = InstrCategory::Operator;
            rec.signature = std::move(sig);
        };
        const auto local_type = [&]() -> std::optional<ValType> {
            if (rec.instr.idx < body.locals.size())
                return body.locals[rec.instr.idx];
            return std::nullopt;
        };
        const auto global_type = [&]() -> std::optional<ValType> {
            if (rec.instr.idx < global_count)
                return module.global_type(rec.instr.idx).type;
            return std::nullopt;
        };

        switch (info->cls)
        {
        case OpClass::Control:
            rec.category = InstrCategory::Control;
            break;
        case OpClass::Const:
            operand(static_signature(*info).results.front());
            break;
        case OpClass::LocalGet:
            if (const auto t = local_type(); t && is_numeric(*t))
                operand(*t);
            break;
        case OpClass::GlobalGet:
            if (const auto t = global_type(); t && is_numeric(*t))
                operand(*t);
            break;
        case OpClass::LocalSet:
            if (const auto t = local_type(); t && is_numeric(*t))
                operator_({{*t}, {}});
            break;
        case OpClass::LocalTee:
            if (const auto t = local_type(); t && is_numeric(*t))
                operator_({{*t}, {*t}});
            break;
        case OpClass::GlobalSet:
            if (const auto t = global_type(); t && is_numeric(*t))
                operator_({{*t}, {}});
            break;
        case OpClass::Load:
            operator_(static_signature(*info));
            if (i > 0 && body.instructions[i - 1].instr.op == op::i32_const)
            {
                rec.category = InstrCategory::Operand;
                rec.fused = true;
            }
            break;
        case OpClass::Store:
        case OpClass::Numeric:
            operator_(static_signature(*info));
            break;
        case OpClass::Other:
            break;
        }
    }
}

std::string instr_text(const Instr& instr)
{
    const OpInfo* info = op_info(instr.op);
    if (info == nullptr)
        return opcode_name(instr.op);
    std::string s{info->name};
    const auto append_u = [&s](std::uint64_t v) {
        s += ' ';
        s += std::to_string(v);
    };
    switch (info->imm)
    {
    case ImmKind::None:
        break;
    case ImmKind::BlockType:
    {
        const auto bt = static_cast<std::int64_t>(instr.imm);
        if (bt >= 0)
            s += " (type " + std::to_string(bt) + ")";
        else if (bt != -64)
        {
            const auto t = valtype_from_byte(static_cast<std::uint8_t>(bt & 0x7f));
            s += " (result ";
            s += t ? std::string{valtype_name(*t)} : std::string{"?"};
            s += ")";
        }
        break;
    }
    case ImmKind::Label:
    case ImmKind::Func:
    case ImmKind::Local:
    case ImmKind::Global:
    case ImmKind::Table:
    case ImmKind::Data:
    case ImmKind::Elem:
    case ImmKind::Lane:
        append_u(instr.idx);
        break;
    case ImmKind::MemIndex:
    case ImmKind::MemoryFill:
        if (instr.idx != 0)
            append_u(instr.idx);
        break;
    case ImmKind::LabelTable:
        for (const auto t : instr.list)
            append_u(t);
        append_u(instr.idx);
        break;
    case ImmKind::CallIndirect:
        if (instr.idx2 != 0)
            append_u(instr.idx2);
        s += " (type " + std::to_string(instr.idx) + ")";
        break;
    case ImmKind::MemoryInit:
    case ImmKind::TableInit:
    case ImmKind::MemoryCopy:
    case ImmKind::TableCopy:
        append_u(instr.idx);
        append_u(instr.idx2);
        break;
    case ImmKind::MemArg:
    case ImmKind::MemArgLane:
    {
        if (instr.idx & 0x40)
            append_u(instr.idx2);
        if (instr.imm != 0)
            s += " offset=" + std::to_string(instr.imm);
        const auto align = instr.idx & 0x3f;
        if (align != info->natural_align)
            s += " align=" + std::to_string(std::uint64_t{1} << std::min<std::uint32_t>(align, 63));
        if (info->imm == ImmKind::MemArgLane && !instr.bytes.empty())
            append_u(instr.bytes[0]);
        break;
    }
    case ImmKind::I32:
        s += ' ' + std::to_string(instr.as_i32());
        break;
    case ImmKind::I64:
        s += ' ' + std::to_string(instr.as_i64());
        break;
    case ImmKind::F32:
        s += ' ' + format_float(instr.as_f32(), true);
        break;
    case ImmKind::F64:
        s += ' ' + format_float(instr.as_f64(), false);
        break;
    case ImmKind::SelectTypes:
        s += " (result";
        for (const auto t : instr.list)
        {
            const auto vt = valtype_from_byte(static_cast<std::uint8_t>(t));
            s += ' ';
            s += vt ? valtype_name(*vt) : "?";
        }
        s += ')';
        break;
    case ImmKind::HeapType:
        s += instr.idx == 0x70 ? " func" : " extern";
        break;
    case ImmKind::V128:
    case ImmKind::Shuffle:
    {
        s += info->imm == ImmKind::V128 ? " i8x16" : "";
        for (const auto b : instr.bytes)
            append_u(b);
        break;
    }
    }
    return s;
}
}  // namespace warplens::wasm
