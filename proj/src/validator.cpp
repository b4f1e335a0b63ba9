// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/validator.hpp"
#include "warplens/opcodes.hpp"
#include <algorithm>
#include <set>
#include <string_view>
#include <vector>

namespace warplens::wasm
{
namespace
{
// Value types are tracked as raw binary codes; 0 is the "unknown" type that
// appears on the stack after unconditional branches.
using Ty = std::uint8_t;
constexpr Ty kUnknown = 0;
constexpr Ty I32 = 0x7f;
constexpr Ty I64 = 0x7e;
constexpr Ty F32 = 0x7d;
constexpr Ty F64 = 0x7c;
constexpr Ty V128 = 0x7b;
constexpr Ty FUNCREF = 0x70;
constexpr Ty EXTERNREF = 0x6f;

bool valid_valtype(std::uint8_t b)
{
    return b == I32 || b == I64 || b == F32 || b == F64 || b == V128 || b == FUNCREF || b == EXTERNREF;
}

bool is_ref(Ty t)
{
    return t == FUNCREF || t == EXTERNREF;
}

struct Invalid
{
    std::string rule;
    std::string message;
    std::size_t offset;
};

struct Sig
{
    std::vector<Ty> params;
    std::vector<Ty> results;
};

struct Frame
{
    std::uint8_t opcode;
    std::vector<Ty> start_types;
    std::vector<Ty> end_types;
    std::size_t height;
    bool unreachable = false;
};

class Validator
{
public:
    explicit Validator(ByteView bytes) : in_{bytes} {}

    void run()
    {
        static constexpr std::uint8_t header[] = {0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};
        if (in_.remaining() < 8)
            fail("malformed", "truncated header");
        const auto h = in_.take(8);
        if (!std::equal(h.begin(), h.end(), std::begin(header)))
            fail("malformed", "bad magic or version");

        int last_rank = 0;
        while (!in_.eof())
        {
            const auto id = in_.u8();
            const auto size = in_.u32();
            const auto base = in_.offset();
            ByteReader s{in_.take(size), base};
            if (id != 0)
            {
                const int rank = section_rank(id);
                if (rank < 0)
                    fail("malformed", "unknown section id " + std::to_string(id));
                if (rank <= last_rank)
                    fail("section-order", "section " + std::to_string(id) + " out of order or duplicated");
                last_rank = rank;
            }
            section(id, s);
            if (!s.eof())
                fail("malformed", "section size mismatch", s.offset());
        }
        if (!saw_code_ && defined_funcs_ != 0)
            fail("function-code-mismatch", "function section without code section");
        if (data_count_ && data_segments_ != *data_count_)
            fail("data-count-mismatch", "data count does not match data section");
    }

private:
    [[noreturn]] void fail(std::string rule, std::string message) const { fail(std::move(rule), std::move(message), at_); }

    [[noreturn]] void fail(std::string rule, std::string message, std::size_t offset) const
    {
        throw Invalid{std::move(rule), std::move(message), offset};
    }

    static int section_rank(std::uint8_t id)
    {
        switch (id)
        {
        case 1: return 1;
        case 2: return 2;
        case 3: return 3;
        case 4: return 4;
        case 5: return 5;
        case 13: return 6;
        case 6: return 7;
        case 7: return 8;
        case 8: return 9;
        case 9: return 10;
        case 12: return 11;
        case 10: return 12;
        case 11: return 13;
        default: return -1;
        }
    }

    Ty read_valtype(ByteReader& s)
    {
        at_ = s.offset();
        const auto b = s.u8();
        if (!valid_valtype(b))
            fail("malformed", "invalid value type");
        return b;
    }

    Ty read_reftype(ByteReader& s)
    {
        const auto t = read_valtype(s);
        if (!is_ref(t))
            fail("malformed", "expected reference type");
        return t;
    }

    void read_limits(ByteReader& s, std::uint64_t bound, const char* what)
    {
        at_ = s.offset();
        const auto flags = s.u8();
        if (flags > 1)
            fail("unsupported-limits", std::string{what} + " limits flags " + std::to_string(flags));
        const std::uint64_t min = s.u32();
        if (min > bound)
            fail("limits", std::string{what} + " minimum exceeds bound");
        if (flags & 1)
        {
            const std::uint64_t max = s.u32();
            if (max > bound)
                fail("limits", std::string{what} + " maximum exceeds bound");
            if (max < min)
                fail("limits", std::string{what} + " maximum below minimum");
        }
    }

    void section(std::uint8_t id, ByteReader& s)
    {
        switch (id)
        {
        case 0:
            s.name();
            s.take(s.remaining());
            break;
        case 1:
            for (auto n = s.u32(); n > 0; --n)
            {
                at_ = s.offset();
                if (s.u8() != 0x60)
                    fail("malformed", "expected function type");
                Sig sig;
                for (auto k = s.u32(); k > 0; --k)
                    sig.params.push_back(read_valtype(s));
                for (auto k = s.u32(); k > 0; --k)
                    sig.results.push_back(read_valtype(s));
                types_.push_back(std::move(sig));
            }
            break;
        case 2:
            for (auto n = s.u32(); n > 0; --n)
            {
                s.name();
                s.name();
                at_ = s.offset();
                switch (s.u8())
                {
                case 0:
                {
                    at_ = s.offset();
                    const auto t = s.u32();
                    if (t >= types_.size())
                        fail("index-out-of-range", "import type index");
                    funcs_.push_back(t);
                    ++imported_funcs_;
                    break;
                }
                case 1:
                    tables_.push_back(read_reftype(s));
                    read_limits(s, 0xffffffffu, "table");
                    break;
                case 2:
                    read_limits(s, 65536, "memory");
                    ++memories_;
                    break;
                case 3:
                {
                    const auto t = read_valtype(s);
                    at_ = s.offset();
                    const auto m = s.u8();
                    if (m > 1)
                        fail("malformed", "global mutability");
                    globals_.push_back({t, m == 1});
                    ++imported_globals_;
                    break;
                }
                default:
                    fail("malformed", "import kind");
                }
            }
            if (memories_ > 1)
                fail("multiple-memories", "at most one memory is allowed");
            break;
        case 3:
            for (auto n = s.u32(); n > 0; --n)
            {
                at_ = s.offset();
                const auto t = s.u32();
                if (t >= types_.size())
                    fail("index-out-of-range", "function type index");
                funcs_.push_back(t);
                ++defined_funcs_;
            }
            break;
        case 4:
            for (auto n = s.u32(); n > 0; --n)
            {
                tables_.push_back(read_reftype(s));
                read_limits(s, 0xffffffffu, "table");
            }
            break;
        case 5:
            for (auto n = s.u32(); n > 0; --n)
            {
                read_limits(s, 65536, "memory");
                ++memories_;
            }
            if (memories_ > 1)
                fail("multiple-memories", "at most one memory is allowed");
            break;
        case 6:
            for (auto n = s.u32(); n > 0; --n)
            {
                const auto t = read_valtype(s);
                at_ = s.offset();
                const auto m = s.u8();
                if (m > 1)
                    fail("malformed", "global mutability");
                const_expr(s, t);
                globals_.push_back({t, m == 1});
            }
            break;
        case 7:
        {
            std::set<std::string> names;
            for (auto n = s.u32(); n > 0; --n)
            {
                at_ = s.offset();
                auto name = s.name();
                if (!names.insert(name).second)
                    fail("duplicate-export", "duplicate export name " + name);
                const auto kind = s.u8();
                at_ = s.offset();
                const auto idx = s.u32();
                const std::size_t limit = kind == 0   ? funcs_.size()
                                          : kind == 1 ? tables_.size()
                                          : kind == 2 ? memories_
                                          : kind == 3 ? globals_.size()
                                                      : 0;
                if (kind > 3)
                    fail("malformed", "export kind");
                if (idx >= limit)
                    fail("index-out-of-range", "export index");
                if (kind == 0)
                    refs_.insert(idx);
            }
            break;
        }
        case 8:
        {
            at_ = s.offset();
            const auto f = s.u32();
            if (f >= funcs_.size())
                fail("index-out-of-range", "start function");
            const auto& sig = types_[funcs_[f]];
            if (!sig.params.empty() || !sig.results.empty())
                fail("start-type", "start function must have type [] -> []");
            break;
        }
        case 9:
            elements(s);
            break;
        case 12:
            data_count_ = s.u32();
            break;
        case 10:
            code(s);
            break;
        case 11:
            data(s);
            break;
        case 13:
            fail("unsupported-feature", "tag section");
        }
    }

    void elements(ByteReader& s)
    {
        for (auto n = s.u32(); n > 0; --n)
        {
            at_ = s.offset();
            const auto flags = s.u32();
            if (flags > 7)
                fail("malformed", "element segment flags");
            const bool passive_or_declared = flags & 1;
            const bool explicit_table = flags & 2;
            const bool exprs = flags & 4;
            std::uint32_t table = 0;
            if (!passive_or_declared && explicit_table)
            {
                at_ = s.offset();
                table = s.u32();
            }
            if (!passive_or_declared)
            {
                if (table >= tables_.size())
                    fail("index-out-of-range", "element table index");
                const_expr(s, I32);
            }
            Ty type = FUNCREF;
            if (passive_or_declared || explicit_table)
            {
                if (exprs)
                    type = read_reftype(s);
                else
                {
                    at_ = s.offset();
                    if (s.u8() != 0x00)
                        fail("malformed", "element kind");
                }
            }
            for (auto k = s.u32(); k > 0; --k)
            {
                if (exprs)
                    const_expr(s, type);
                else
                {
                    at_ = s.offset();
                    const auto f = s.u32();
                    if (f >= funcs_.size())
                        fail("index-out-of-range", "element function index");
                    refs_.insert(f);
                }
            }
            if (!passive_or_declared && tables_[table] != type)
                fail("type-mismatch", "element type does not match table");
            elem_types_.push_back(type);
        }
    }

    void data(ByteReader& s)
    {
        for (auto n = s.u32(); n > 0; --n)
        {
            at_ = s.offset();
            const auto flags = s.u32();
            if (flags > 2)
                fail("malformed", "data segment flags");
            std::uint32_t mem = 0;
            if (flags == 2)
                mem = s.u32();
            if (flags != 1)
            {
                if (mem >= memories_)
                    fail("index-out-of-range", "data memory index");
                const_expr(s, I32);
            }
            s.take(s.u32());
            ++data_segments_;
        }
    }

    // Constant expressions: a single producing instruction followed by end.
    void const_expr(ByteReader& s, Ty expected)
    {
        at_ = s.offset();
        const auto opcode = s.u8();
        Ty produced = kUnknown;
        switch (opcode)
        {
        case 0x41:
            s.s32();
            produced = I32;
            break;
        case 0x42:
            s.s64();
            produced = I64;
            break;
        case 0x43:
            s.take(4);
            produced = F32;
            break;
        case 0x44:
            s.take(8);
            produced = F64;
            break;
        case 0x23:
        {
            const auto g = s.u32();
            if (g >= imported_globals_)
                fail("constant-expression", "global.get must refer to an imported global");
            if (globals_[g].second)
                fail("constant-expression", "global.get of a mutable global");
            produced = globals_[g].first;
            break;
        }
        case 0xd0:
            produced = read_reftype(s);
            break;
        case 0xd2:
        {
            const auto f = s.u32();
            if (f >= funcs_.size())
                fail("index-out-of-range", "ref.func index");
            refs_.insert(f);
            produced = FUNCREF;
            break;
        }
        case 0xfd:
        {
            if (s.u32() != 12)
                fail("constant-expression", "non-constant instruction");
            s.take(16);
            produced = V128;
            break;
        }
        default:
            fail("constant-expression", "non-constant instruction");
        }
        at_ = s.offset();
        if (s.u8() != 0x0b)
            fail("constant-expression", "constant expression must be a single instruction");
        if (produced != expected)
            fail("type-mismatch", "constant expression type");
    }

    void code(ByteReader& s)
    {
        saw_code_ = true;
        const auto n = s.u32();
        if (n != defined_funcs_)
            fail("function-code-mismatch", "code count differs from function count");
        for (std::uint32_t i = 0; i < n; ++i)
        {
            const auto size = s.u32();
            const auto base = s.offset();
            ByteReader body{s.take(size), base};
            current_func_ = imported_funcs_ + i;
            function(body, types_[funcs_[*current_func_]]);
        }
        current_func_.reset();
    }

    // --- function bodies -------------------------------------------------

    void push(Ty t) { stack_.push_back(t); }

    Ty pop()
    {
        auto& f = frames_.back();
        if (stack_.size() == f.height)
        {
            if (f.unreachable)
                return kUnknown;
            fail("type-mismatch", "operand stack underflow");
        }
        const auto t = stack_.back();
        stack_.pop_back();
        return t;
    }

    Ty pop(Ty expected)
    {
        const auto actual = pop();
        if (actual == kUnknown)
            return expected;
        if (expected != kUnknown && actual != expected)
            fail("type-mismatch", "expected " + ty_name(expected) + " but got " + ty_name(actual));
        return actual;
    }

    void pop_all(const std::vector<Ty>& types)
    {
        for (auto it = types.rbegin(); it != types.rend(); ++it)
            pop(*it);
    }

    void push_all(const std::vector<Ty>& types)
    {
        for (const auto t : types)
            push(t);
    }

    void push_frame(std::uint8_t opcode, std::vector<Ty> in, std::vector<Ty> out)
    {
        frames_.push_back({opcode, in, std::move(out), stack_.size(), false});
        push_all(in);
    }

    Frame pop_frame()
    {
        if (frames_.empty())
            fail("malformed", "unbalanced end");
        const auto& f = frames_.back();
        pop_all(f.end_types);
        if (stack_.size() != f.height)
            fail("type-mismatch", "values remaining on stack at end of block");
        Frame out = frames_.back();
        frames_.pop_back();
        return out;
    }

    void set_unreachable()
    {
        auto& f = frames_.back();
        stack_.resize(f.height);
        f.unreachable = true;
    }

    const std::vector<Ty>& label_types(const Frame& f) const
    {
        return f.opcode == 0x03 ? f.start_types : f.end_types;
    }

    const Frame& label(std::uint32_t depth)
    {
        if (depth >= frames_.size())
            fail("index-out-of-range", "branch depth");
        return frames_[frames_.size() - 1 - depth];
    }

    static std::string ty_name(Ty t)
    {
        switch (t)
        {
        case I32: return "i32";
        case I64: return "i64";
        case F32: return "f32";
        case F64: return "f64";
        case V128: return "v128";
        case FUNCREF: return "funcref";
        case EXTERNREF: return "externref";
        default: return "unknown";
        }
    }

    Sig block_type(ByteReader& s)
    {
        at_ = s.offset();
        const auto bt = s.s33();
        if (bt == -64)
            return {};
        if (bt < 0)
        {
            const auto b = static_cast<std::uint8_t>(bt & 0x7f);
            if (!valid_valtype(b))
                fail("malformed", "block type");
            return {{}, {b}};
        }
        if (static_cast<std::uint64_t>(bt) >= types_.size())
            fail("index-out-of-range", "block type index");
        return types_[static_cast<std::size_t>(bt)];
    }

    void memarg(ByteReader& s, unsigned natural)
    {
        at_ = s.offset();
        auto align = s.u32();
        if (align & 0x40)
        {
            align &= ~0x40u;
            if (s.u32() >= memories_)
                fail("index-out-of-range", "memory index");
        }
        s.u64();
        if (memories_ == 0)
            fail("index-out-of-range", "memory access without memory");
        if (align > natural)
            fail("alignment", "alignment must not be larger than natural");
    }

    void require_memory()
    {
        if (memories_ == 0)
            fail("index-out-of-range", "memory instruction without memory");
    }

    void unop(Ty in, Ty out)
    {
        pop(in);
        push(out);
    }

    void binop(Ty in, Ty out)
    {
        pop(in);
        pop(in);
        push(out);
    }

    void function(ByteReader& s, const Sig& sig)
    {
        locals_ = sig.params;
        std::uint64_t total = 0;
        for (auto n = s.u32(); n > 0; --n)
        {
            const auto count = s.u32();
            const auto t = read_valtype(s);
            total += count;
            if (total > 50000)
                fail("too-many-locals", "local count");
            locals_.insert(locals_.end(), count, t);
        }
        results_ = sig.results;
        stack_.clear();
        frames_.clear();
        push_frame(0x02, {}, sig.results);

        while (true)
        {
            if (s.eof())
                fail("malformed", "function body without end", s.offset());
            at_ = s.offset();
            const auto opcode = s.u8();
            if (opcode == 0x0b)
            {
                const auto f = pop_frame();
                if (f.opcode == 0x04 && f.start_types != f.end_types)
                    fail("type-mismatch", "if without else must have matching parameter and result types");
                push_all(f.end_types);
                if (frames_.empty())
                {
                    if (!s.eof())
                        fail("malformed", "bytes after function end", s.offset());
                    return;
                }
                continue;
            }
            instruction(opcode, s);
        }
    }

    void instruction(std::uint8_t opcode, ByteReader& s)
    {
        switch (opcode)
        {
        case 0x00:
            set_unreachable();
            return;
        case 0x01:
            return;
        case 0x02:
        case 0x03:
        {
            auto bt = block_type(s);
            pop_all(bt.params);
            push_frame(opcode, bt.params, bt.results);
            return;
        }
        case 0x04:
        {
            auto bt = block_type(s);
            pop(I32);
            pop_all(bt.params);
            push_frame(opcode, bt.params, bt.results);
            return;
        }
        case 0x05:
        {
            if (frames_.back().opcode != 0x04)
                fail("malformed", "else without if");
            auto f = pop_frame();
            push_frame(0x05, f.start_types, f.end_types);
            return;
        }
        case 0x0c:
        {
            at_ = s.offset();
            const auto& l = label(s.u32());
            pop_all(label_types(l));
            set_unreachable();
            return;
        }
        case 0x0d:
        {
            at_ = s.offset();
            const auto depth = s.u32();
            pop(I32);
            const auto types = label_types(label(depth));
            pop_all(types);
            push_all(types);
            return;
        }
        case 0x0e:
        {
            std::vector<std::uint32_t> targets;
            for (auto n = s.u32(); n > 0; --n)
                targets.push_back(s.u32());
            at_ = s.offset();
            const auto def = s.u32();
            pop(I32);
            const auto arity = label_types(label(def)).size();
            for (const auto t : targets)
            {
                const auto types = label_types(label(t));
                if (types.size() != arity)
                    fail("type-mismatch", "br_table target arity");
                // Each target is checked against a fresh view of the stack.
                const auto saved = stack_;
                pop_all(types);
                stack_ = saved;
            }
            pop_all(label_types(label(def)));
            set_unreachable();
            return;
        }
        case 0x0f:
            pop_all(results_);
            set_unreachable();
            return;
        case 0x10:
        case 0x12:
        {
            at_ = s.offset();
            const auto f = s.u32();
            if (f >= funcs_.size())
                fail("index-out-of-range", "call target");
            const auto& callee = types_[funcs_[f]];
            pop_all(callee.params);
            if (opcode == 0x12)
            {
                if (callee.results != results_)
                    fail("type-mismatch", "tail call result types");
                set_unreachable();
            }
            else
                push_all(callee.results);
            return;
        }
        case 0x11:
        case 0x13:
        {
            at_ = s.offset();
            const auto t = s.u32();
            const auto table = s.u32();
            if (t >= types_.size())
                fail("index-out-of-range", "call_indirect type");
            if (table >= tables_.size())
                fail("index-out-of-range", "call_indirect table");
            if (tables_[table] != FUNCREF)
                fail("type-mismatch", "call_indirect table must hold funcref");
            pop(I32);
            const auto& callee = types_[t];
            pop_all(callee.params);
            if (opcode == 0x13)
            {
                if (callee.results != results_)
                    fail("type-mismatch", "tail call result types");
                set_unreachable();
            }
            else
                push_all(callee.results);
            return;
        }
        case 0x1a:
            pop();
            return;
        case 0x1b:
        {
            pop(I32);
            const auto a = pop();
            const auto b = pop();
            if (is_ref(a) || is_ref(b))
                fail("type-mismatch", "untyped select on reference values");
            if (a != kUnknown && b != kUnknown && a != b)
                fail("type-mismatch", "select operands differ");
            push(a == kUnknown ? b : a);
            return;
        }
        case 0x1c:
        {
            at_ = s.offset();
            if (s.u32() != 1)
                fail("malformed", "typed select arity");
            const auto t = read_valtype(s);
            pop(I32);
            pop(t);
            pop(t);
            push(t);
            return;
        }
        case 0x20:
        case 0x21:
        case 0x22:
        {
            at_ = s.offset();
            const auto k = s.u32();
            if (k >= locals_.size())
                fail("index-out-of-range", "local index");
            const auto t = locals_[k];
            if (opcode == 0x20)
                push(t);
            else if (opcode == 0x21)
                pop(t);
            else
                unop(t, t);
            return;
        }
        case 0x23:
        case 0x24:
        {
            at_ = s.offset();
            const auto k = s.u32();
            if (k >= globals_.size())
                fail("index-out-of-range", "global index");
            const auto [t, is_mut] = globals_[k];
            if (opcode == 0x23)
                push(t);
            else
            {
                if (!is_mut)
                    fail("immutable-global", "global.set of immutable global");
                pop(t);
            }
            return;
        }
        case 0x25:
        case 0x26:
        {
            at_ = s.offset();
            const auto x = s.u32();
            if (x >= tables_.size())
                fail("index-out-of-range", "table index");
            if (opcode == 0x25)
                unop(I32, tables_[x]);
            else
            {
                pop(tables_[x]);
                pop(I32);
            }
            return;
        }
        case 0x3f:
        case 0x40:
        {
            at_ = s.offset();
            if (s.u8() != 0)
                fail("malformed", "memory index byte");
            require_memory();
            if (opcode == 0x3f)
                push(I32);
            else
                unop(I32, I32);
            return;
        }
        case 0x41:
            s.s32();
            push(I32);
            return;
        case 0x42:
            s.s64();
            push(I64);
            return;
        case 0x43:
            s.take(4);
            push(F32);
            return;
        case 0x44:
            s.take(8);
            push(F64);
            return;
        case 0xd0:
            push(read_reftype(s));
            return;
        case 0xd1:
        {
            const auto t = pop();
            if (t != kUnknown && !is_ref(t))
                fail("type-mismatch", "ref.is_null on non-reference");
            push(I32);
            return;
        }
        case 0xd2:
        {
            at_ = s.offset();
            const auto f = s.u32();
            if (f >= funcs_.size())
                fail("index-out-of-range", "ref.func index");
            if (!refs_.contains(f))
                fail("undeclared-function-reference", "ref.func of undeclared function");
            push(FUNCREF);
            return;
        }
        case 0xfc:
            misc(s);
            return;
        case 0xfd:
            simd(s);
            return;
        default:
            break;
        }

        if (opcode >= 0x28 && opcode <= 0x35)
        {
            static constexpr Ty result[] = {I32, I64, F32, F64, I32, I32, I32, I32, I64, I64, I64, I64, I64, I64};
            static constexpr unsigned natural[] = {2, 3, 2, 3, 0, 0, 1, 1, 0, 0, 1, 1, 2, 2};
            memarg(s, natural[opcode - 0x28]);
            unop(I32, result[opcode - 0x28]);
            return;
        }
        if (opcode >= 0x36 && opcode <= 0x3e)
        {
            static constexpr Ty value[] = {I32, I64, F32, F64, I32, I32, I64, I64, I64};
            static constexpr unsigned natural[] = {2, 3, 2, 3, 0, 1, 0, 1, 2};
            memarg(s, natural[opcode - 0x36]);
            pop(value[opcode - 0x36]);
            pop(I32);
            return;
        }
        if (numeric(opcode))
            return;
        fail("unknown-opcode", "unknown opcode " + std::to_string(opcode));
    }

    bool numeric(std::uint8_t opcode)
    {
        const auto in = [opcode](std::uint8_t lo, std::uint8_t hi) { return opcode >= lo && opcode <= hi; };
        if (opcode == 0x45)
            unop(I32, I32);
        else if (in(0x46, 0x4f))
            binop(I32, I32);
        else if (opcode == 0x50)
            unop(I64, I32);
        else if (in(0x51, 0x5a))
            binop(I64, I32);
        else if (in(0x5b, 0x60))
            binop(F32, I32);
        else if (in(0x61, 0x66))
            binop(F64, I32);
        else if (in(0x67, 0x69))
            unop(I32, I32);
        else if (in(0x6a, 0x78))
            binop(I32, I32);
        else if (in(0x79, 0x7b))
            unop(I64, I64);
        else if (in(0x7c, 0x8a))
            binop(I64, I64);
        else if (in(0x8b, 0x91))
            unop(F32, F32);
        else if (in(0x92, 0x98))
            binop(F32, F32);
        else if (in(0x99, 0x9f))
            unop(F64, F64);
        else if (in(0xa0, 0xa6))
            binop(F64, F64);
        else if (in(0xa7, 0xbf))
        {
            static constexpr Ty from[] = {I64, F32, F32, F64, F64, I32, I32, F32, F32, F64, F64, I32, I32,
                I64, I64, F64, I32, I32, I64, I64, F32, F32, F64, I32, I64};
            static constexpr Ty to[] = {I32, I32, I32, I32, I32, I64, I64, I64, I64, I64, I64, F32, F32,
                F32, F32, F32, F64, F64, F64, F64, F64, I32, I64, F32, F64};
            unop(from[opcode - 0xa7], to[opcode - 0xa7]);
        }
        else if (in(0xc0, 0xc1))
            unop(I32, I32);
        else if (in(0xc2, 0xc4))
            unop(I64, I64);
        else
            return false;
        return true;
    }

    void misc(ByteReader& s)
    {
        at_ = s.offset();
        const auto sub = s.u32();
        switch (sub)
        {
        case 0:
        case 1:
            unop(F32, I32);
            return;
        case 2:
        case 3:
            unop(F64, I32);
            return;
        case 4:
        case 5:
            unop(F32, I64);
            return;
        case 6:
        case 7:
            unop(F64, I64);
            return;
        case 8:
        {
            const auto d = s.u32();
            if (s.u8() != 0)
                fail("malformed", "memory index byte");
            require_memory();
            check_data_index(d);
            pop(I32);
            pop(I32);
            pop(I32);
            return;
        }
        case 9:
            check_data_index(s.u32());
            return;
        case 10:
            if (s.u8() != 0 || s.u8() != 0)
                fail("malformed", "memory index byte");
            require_memory();
            pop(I32);
            pop(I32);
            pop(I32);
            return;
        case 11:
            if (s.u8() != 0)
                fail("malformed", "memory index byte");
            require_memory();
            pop(I32);
            pop(I32);
            pop(I32);
            return;
        case 12:
        {
            const auto e = s.u32();
            const auto t = s.u32();
            if (e >= elem_types_.size() || t >= tables_.size())
                fail("index-out-of-range", "table.init index");
            if (elem_types_[e] != tables_[t])
                fail("type-mismatch", "table.init element type");
            pop(I32);
            pop(I32);
            pop(I32);
            return;
        }
        case 13:
            if (s.u32() >= elem_types_.size())
                fail("index-out-of-range", "elem.drop index");
            return;
        case 14:
        {
            const auto dst = s.u32();
            const auto src = s.u32();
            if (dst >= tables_.size() || src >= tables_.size())
                fail("index-out-of-range", "table.copy index");
            if (tables_[dst] != tables_[src])
                fail("type-mismatch", "table.copy element types");
            pop(I32);
            pop(I32);
            pop(I32);
            return;
        }
        case 15:
        case 16:
        case 17:
        {
            const auto x = s.u32();
            if (x >= tables_.size())
                fail("index-out-of-range", "table index");
            if (sub == 15)
            {
                pop(I32);
                pop(tables_[x]);
                push(I32);
            }
            else if (sub == 16)
                push(I32);
            else
            {
                pop(I32);
                pop(tables_[x]);
                pop(I32);
            }
            return;
        }
        default:
            fail("unknown-opcode", "unknown 0xfc sub-opcode " + std::to_string(sub));
        }
    }

    void check_data_index(std::uint32_t d)
    {
        if (!data_count_)
            fail("data-count-required", "data index used without data count section");
        if (d >= *data_count_)
            fail("index-out-of-range", "data index");
    }

    void simd(ByteReader& s)
    {
        at_ = s.offset();
        const auto sub = s.u32();
        const OpInfo* info = op_info(prefixed(0xfd, sub));
        if (info == nullptr)
            fail("unknown-opcode", "unknown SIMD sub-opcode " + std::to_string(sub));
        const auto lanes_of = [sub]() -> unsigned {
            if (sub >= 21 && sub <= 23)
                return 16;
            if (sub >= 24 && sub <= 26)
                return 8;
            if (sub == 27 || sub == 28 || sub == 31 || sub == 32)
                return 4;
            return 2;
        };
        switch (info->imm)
        {
        case ImmKind::MemArg:
            memarg(s, info->natural_align);
            break;
        case ImmKind::MemArgLane:
        {
            memarg(s, info->natural_align);
            at_ = s.offset();
            const auto lane = s.u8();
            if (lane >= (16u >> info->natural_align))
                fail("lane-index", "lane index out of range");
            break;
        }
        case ImmKind::V128:
            s.take(16);
            break;
        case ImmKind::Shuffle:
            for (int i = 0; i < 16; ++i)
            {
                at_ = s.offset();
                if (s.u8() >= 32)
                    fail("lane-index", "shuffle lane out of range");
            }
            break;
        case ImmKind::Lane:
            at_ = s.offset();
            if (s.u8() >= lanes_of())
                fail("lane-index", "lane index out of range");
            break;
        default:
            break;
        }
        const auto decode = [](char c) -> Ty {
            switch (c)
            {
            case 'i': return I32;
            case 'I': return I64;
            case 'f': return F32;
            case 'F': return F64;
            default: return V128;
            }
        };
        for (auto it = info->params.rbegin(); it != info->params.rend(); ++it)
            pop(decode(*it));
        for (const char c : info->results)
            push(decode(c));
    }

    ByteReader in_;
    std::size_t at_ = 0;
    std::vector<Sig> types_;
    std::vector<std::uint32_t> funcs_;
    std::uint32_t imported_funcs_ = 0;
    std::uint32_t defined_funcs_ = 0;
    std::vector<Ty> tables_;
    std::uint32_t memories_ = 0;
    std::vector<std::pair<Ty, bool>> globals_;
    std::uint32_t imported_globals_ = 0;
    std::vector<Ty> elem_types_;
    std::set<std::uint32_t> refs_;
    std::optional<std::uint32_t> data_count_;
    std::uint32_t data_segments_ = 0;
    bool saw_code_ = false;

    std::vector<Ty> locals_;
    std::vector<Ty> results_;
    std::vector<Ty> stack_;
    std::vector<Frame> frames_;

public:
    std::optional<std::uint32_t> current_func_;
};
}  // namespace

std::string ValidationResult::describe() const
{
    if (ok)
        return "valid";
    std::string s = "invalid [" + rule + "] " + message + " at offset " + std::to_string(offset);
    if (function)
        s += " (function " + std::to_string(*function) + ")";
    return s;
}

ValidationResult validate_module(ByteView bytes)
{
    Validator v{bytes};
    try
    {
        v.run();
        return {};
    }
    catch (const Invalid& e)
    {
        return {false, e.rule, e.message, e.offset, v.current_func_};
    }
    catch (const Error& e)
    {
        return {false, "malformed", e.what(), 0, v.current_func_};
    }
}
}  // namespace warplens::wasm
