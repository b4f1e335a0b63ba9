// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/mock.hpp"
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fmt/format.h>
#include <fnmatch.h>
#include <fstream>
#include <limits>
#include <sstream>

namespace warplens::mock
{
using namespace wasm;

namespace
{
constexpr std::size_t kPageSize = 65536;
constexpr std::uint64_t kMaxPages = 1024;
constexpr std::size_t kMaxCallDepth = 1000;

[[noreturn]] void config_error(std::size_t line, const std::string& what)
{
    throw Error{Errc::ConfigError, "cost model line " + std::to_string(line) + ": " + what};
}

template <typename T>
T parse_number(std::string_view s, std::size_t line)
{
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        config_error(line, "bad number '" + std::string{s} + "'");
    return v;
}

// Thrown inside the interpreter, converted to MockResult at the boundary.
struct TrapSignal
{
    std::string message;
};

struct BudgetSignal
{
};

[[noreturn]] void trap(const char* what)
{
    throw TrapSignal{what};
}

struct BlockArity
{
    std::uint32_t params = 0;
    std::uint32_t results = 0;
};

/// Per-function data precomputed before execution.
struct Compiled
{
    const FunctionBody* body = nullptr;
    const FuncType* type = nullptr;
    std::vector<std::uint64_t> cost;
    std::vector<std::uint32_t> end_of;   ///< block/loop/if/else -> matching end
    std::vector<std::uint32_t> else_of;  ///< if -> else, or the end when absent
    std::vector<BlockArity> arity;       ///< for block/loop/if
    std::vector<bool> charged;           ///< first-execution flags without loop amplification
};

struct Label
{
    std::size_t height;
    std::uint32_t arity;
    std::size_t target;
};

BlockArity block_arity(const Module& m, const Instr& in)
{
    const auto bt = static_cast<std::int64_t>(in.imm);
    if (bt == -64)
        return {};
    if (bt < 0)
        return {0, 1};
    const auto& t = m.types.at(static_cast<std::size_t>(bt));
    return {static_cast<std::uint32_t>(t.params.size()), static_cast<std::uint32_t>(t.results.size())};
}

float f32_of(std::uint64_t b) { return std::bit_cast<float>(static_cast<std::uint32_t>(b)); }
double f64_of(std::uint64_t b) { return std::bit_cast<double>(b); }
std::uint64_t bits_of(float f) { return std::bit_cast<std::uint32_t>(f); }
std::uint64_t bits_of(double d) { return std::bit_cast<std::uint64_t>(d); }

template <typename F>
F wasm_min(F a, F b)
{
    if (std::isnan(a) || std::isnan(b))
        return std::numeric_limits<F>::quiet_NaN();
    if (a == 0 && b == 0)
        return std::signbit(a) ? a : b;
    return a < b ? a : b;
}

template <typename F>
F wasm_max(F a, F b)
{
    if (std::isnan(a) || std::isnan(b))
        return std::numeric_limits<F>::quiet_NaN();
    if (a == 0 && b == 0)
        return std::signbit(a) ? b : a;
    return a > b ? a : b;
}

/// Float-to-int truncation. `lo`/`hi` are exclusive bounds on the truncated value.
template <typename I>
I trunc_checked(double x, double lo, double hi)
{
    if (std::isnan(x))
        trap("invalid conversion to integer");
    const double t = std::trunc(x);
    if (!(t > lo && t < hi))
        trap("integer overflow");
    return static_cast<I>(t);
}

template <typename I>
I trunc_sat(double x)
{
    if (std::isnan(x))
        return 0;
    const double t = std::trunc(x);
    if (t <= static_cast<double>(std::numeric_limits<I>::min()))
        return std::numeric_limits<I>::min();
    // 2^N as a double is exact; compare against it rather than max().
    const double limit = std::ldexp(1.0, std::numeric_limits<I>::digits);
    if (t >= limit)
        return std::numeric_limits<I>::max();
    return static_cast<I>(t);
}

class Machine
{
public:
    Machine(const Module& m, const CostModel& model) : m_{m}, model_{model}
    {
        const auto pages = m.memories.empty() ? 0 : std::max<std::uint64_t>(1, m.memories[0].min);
        if (!m.memories.empty())
        {
            if (pages > kMaxPages)
                throw Error{Errc::UnsupportedFeature, "declared memory exceeds the mock's limit"};
            memory_.assign(pages * kPageSize, 0);
            max_pages_ = std::min<std::uint64_t>(m.memories[0].max.value_or(kMaxPages), kMaxPages);
        }
        for (const auto& g : m.globals)
            globals_.push_back(eval_const(g.init));
        for (const auto& f : m.functions)
            compiled_.push_back(compile(f));
    }

    void instantiate()
    {
        for (const auto& d : m_.data)
        {
            if (d.mode == 1)
                continue;
            const auto off = static_cast<std::uint32_t>(eval_const(d.offset));
            if (std::uint64_t{off} + d.init.size() > memory_.size())
                trap("out of bounds memory access");
            std::copy(d.init.begin(), d.init.end(), memory_.begin() + off);
        }
        if (m_.start)
            invoke(*m_.start);
    }

    std::vector<std::uint64_t> call_entry(std::uint32_t func)
    {
        const auto& t = m_.function_type(func);
        for (std::size_t i = 0; i < t.params.size(); ++i)
            stack_.push_back(0);
        invoke(func);
        std::vector<std::uint64_t> out(stack_.end() - static_cast<long>(t.results.size()), stack_.end());
        return out;
    }

    std::uint64_t pseudo_time = 0;
    std::uint64_t steps = 0;

private:
    std::uint64_t eval_const(const std::vector<Instr>& expr) const
    {
        if (expr.size() != 1)
            throw Error{Errc::UnsupportedFeature, "extended constant expression"};
        const auto& in = expr[0];
        switch (in.op)
        {
        case op::i32_const:
        case op::f32_const:
            return in.imm & 0xffffffffu;
        case op::i64_const:
        case op::f64_const:
            return in.imm;
        case op::global_get:
            return globals_.at(in.idx);
        default:
            throw Error{Errc::UnsupportedFeature, "constant expression " + instr_text(in)};
        }
    }

    Compiled compile(const FunctionBody& f)
    {
        Compiled c;
        c.body = &f;
        c.type = &m_.types.at(f.type_index);
        const auto n = f.instructions.size();
        c.cost.resize(n);
        c.end_of.assign(n, 0);
        c.else_of.assign(n, 0);
        c.arity.resize(n);
        c.charged.assign(n, false);
        std::vector<std::uint32_t> open;
        for (std::uint32_t i = 0; i < n; ++i)
        {
            const auto& in = f.instructions[i].instr;
            c.cost[i] = model_.cost(op_info(in.op)->name);
            switch (in.op)
            {
            case op::block:
            case op::loop:
            case op::if_:
                c.arity[i] = block_arity(m_, in);
                c.else_of[i] = UINT32_MAX;
                open.push_back(i);
                break;
            case op::else_:
                c.else_of[open.back()] = i;
                break;
            case op::end:
            {
                const auto o = open.back();
                open.pop_back();
                c.end_of[o] = i;
                if (c.else_of[o] != UINT32_MAX && f.instructions[o].instr.op == op::if_)
                    c.end_of[c.else_of[o]] = i;
                if (c.else_of[o] == UINT32_MAX)
                    c.else_of[o] = i;
                break;
            }
            default:
                break;
            }
        }
        return c;
    }

    std::uint32_t pop32()
    {
        const auto v = static_cast<std::uint32_t>(stack_.back());
        stack_.pop_back();
        return v;
    }
    std::uint64_t pop64()
    {
        const auto v = stack_.back();
        stack_.pop_back();
        return v;
    }
    float popf32() { return f32_of(pop64()); }
    double popf64() { return f64_of(pop64()); }
    void push32(std::uint32_t v) { stack_.push_back(v); }
    void push64(std::uint64_t v) { stack_.push_back(v); }
    void pushf32(float v) { stack_.push_back(bits_of(v)); }
    void pushf64(double v) { stack_.push_back(bits_of(v)); }

    std::uint8_t* address(const Instr& in, std::size_t width)
    {
        const std::uint64_t ea = std::uint64_t{pop32()} + in.imm;
        if (ea + width > memory_.size())
            trap("out of bounds memory access");
        return memory_.data() + ea;
    }

    template <typename T>
    T load(const Instr& in)
    {
        T v;
        std::memcpy(&v, address(in, sizeof(T)), sizeof(T));
        return v;
    }

    template <typename T>
    void store(const Instr& in, T v)
    {
        std::memcpy(address(in, sizeof(T)), &v, sizeof(T));
    }

    void invoke(std::uint32_t func)
    {
        if (++depth_ > kMaxCallDepth)
            trap("call stack exhausted");
        const auto imported = m_.imported_function_count();
        Compiled& c = compiled_.at(func - imported);
        const auto& f = *c.body;
        const auto nparams = c.type->params.size();
        std::vector<std::uint64_t> locals(f.locals.size(), 0);
        for (std::size_t i = nparams; i-- > 0;)
            locals[i] = pop64();
        const std::size_t base = stack_.size();
        const auto nresults = static_cast<std::uint32_t>(c.type->results.size());
        std::vector<Label> labels;
        const auto& code = f.instructions;
        std::size_t pc = 0;

        const auto branch = [&](std::uint32_t depth) {
            if (depth >= labels.size())
            {
                pc = code.size();
                return;
            }
            const Label l = labels[labels.size() - 1 - depth];
            labels.resize(labels.size() - 1 - depth);
            std::copy(stack_.end() - l.arity, stack_.end(), stack_.begin() + static_cast<long>(l.height));
            stack_.resize(l.height + l.arity);
            pc = l.target;
        };

        while (pc < code.size())
        {
            if (++steps > model_.step_budget)
                throw BudgetSignal{};
            if (model_.loop_amplification)
                pseudo_time += c.cost[pc];
            else if (!c.charged[pc])
            {
                c.charged[pc] = true;
                pseudo_time += c.cost[pc];
            }
            const Instr& in = code[pc].instr;
            const std::size_t here = pc++;
            switch (in.op)
            {
            case op::unreachable:
                trap("unreachable");
            case op::nop:
                break;
            case op::block:
                labels.push_back({stack_.size() - c.arity[here].params, c.arity[here].results, c.end_of[here] + 1});
                break;
            case op::loop:
                labels.push_back({stack_.size() - c.arity[here].params, c.arity[here].params, here});
                break;
            case op::if_:
                labels.push_back(
                    {stack_.size() - 1 - c.arity[here].params, c.arity[here].results, c.end_of[here] + 1});
                if (pop32() == 0)
                {
                    const auto e = c.else_of[here];
                    pc = code[e].instr.op == op::else_ ? e + 1 : e;
                }
                break;
            case op::else_:
                pc = c.end_of[here];
                break;
            case op::end:
                labels.pop_back();
                break;
            case op::br:
                branch(in.idx);
                break;
            case op::br_if:
                if (pop32() != 0)
                    branch(in.idx);
                break;
            case op::br_table:
            {
                const auto i = pop32();
                branch(i < in.list.size() ? in.list[i] : in.idx);
                break;
            }
            case op::return_:
                pc = code.size();
                break;
            case op::call:
                invoke(in.idx);
                break;
            case op::drop:
                stack_.pop_back();
                break;
            case op::select:
            case op::select_t:
            {
                const auto cond = pop32();
                const auto b = pop64();
                const auto a = pop64();
                push64(cond != 0 ? a : b);
                break;
            }
            case op::local_get:
                push64(locals[in.idx]);
                break;
            case op::local_set:
                locals[in.idx] = pop64();
                break;
            case op::local_tee:
                locals[in.idx] = stack_.back();
                break;
            case op::global_get:
                push64(globals_[in.idx]);
                break;
            case op::global_set:
                globals_[in.idx] = pop64();
                break;
            case op::i32_const:
            case op::f32_const:
                push64(in.imm & 0xffffffffu);
                break;
            case op::i64_const:
            case op::f64_const:
                push64(in.imm);
                break;
            case op::memory_size:
                push32(static_cast<std::uint32_t>(memory_.size() / kPageSize));
                break;
            case op::memory_grow:
            {
                const auto delta = pop32();
                const auto old = memory_.size() / kPageSize;
                if (old + delta > max_pages_)
                    push32(0xffffffffu);
                else
                {
                    memory_.resize((old + delta) * kPageSize, 0);
                    push32(static_cast<std::uint32_t>(old));
                }
                break;
            }
            default:
                if (!memory_op(in))
                    numeric(in);
                break;
            }
        }
        // Results sit on top; discard anything else the body left above base.
        std::copy(stack_.end() - nresults, stack_.end(), stack_.begin() + static_cast<long>(base));
        stack_.resize(base + nresults);
        --depth_;
    }

    bool memory_op(const Instr& in)
    {
        switch (in.op)
        {
        case 0x28: push32(load<std::uint32_t>(in)); return true;
        case 0x29: push64(load<std::uint64_t>(in)); return true;
        case 0x2a: push32(load<std::uint32_t>(in)); return true;
        case 0x2b: push64(load<std::uint64_t>(in)); return true;
        case 0x2c: push32(static_cast<std::uint32_t>(std::int32_t{load<std::int8_t>(in)})); return true;
        case 0x2d: push32(load<std::uint8_t>(in)); return true;
        case 0x2e: push32(static_cast<std::uint32_t>(std::int32_t{load<std::int16_t>(in)})); return true;
        case 0x2f: push32(load<std::uint16_t>(in)); return true;
        case 0x30: push64(static_cast<std::uint64_t>(std::int64_t{load<std::int8_t>(in)})); return true;
        case 0x31: push64(load<std::uint8_t>(in)); return true;
        case 0x32: push64(static_cast<std::uint64_t>(std::int64_t{load<std::int16_t>(in)})); return true;
        case 0x33: push64(load<std::uint16_t>(in)); return true;
        case 0x34: push64(static_cast<std::uint64_t>(std::int64_t{load<std::int32_t>(in)})); return true;
        case 0x35: push64(load<std::uint32_t>(in)); return true;
        default: break;
        }
        if (in.op < 0x36 || in.op > 0x3e)
            return false;
        const auto v = pop64();
        switch (in.op)
        {
        case 0x36: store(in, static_cast<std::uint32_t>(v)); break;
        case 0x37: store(in, v); break;
        case 0x38: store(in, static_cast<std::uint32_t>(v)); break;
        case 0x39: store(in, v); break;
        case 0x3a: store(in, static_cast<std::uint8_t>(v)); break;
        case 0x3b: store(in, static_cast<std::uint16_t>(v)); break;
        case 0x3c: store(in, static_cast<std::uint8_t>(v)); break;
        case 0x3d: store(in, static_cast<std::uint16_t>(v)); break;
        case 0x3e: store(in, static_cast<std::uint32_t>(v)); break;
        }
        return true;
    }

    void numeric(const Instr& in);

    const Module& m_;
    const CostModel& model_;
    std::vector<Compiled> compiled_;
    std::vector<std::uint64_t> stack_;
    std::vector<std::uint64_t> globals_;
    std::vector<std::uint8_t> memory_;
    std::uint64_t max_pages_ = 0;
    std::size_t depth_ = 0;
};

void Machine::numeric(const Instr& in)
{
    using i32 = std::int32_t;
    using u32 = std::uint32_t;
    using i64 = std::int64_t;
    using u64 = std::uint64_t;

    // Binary helpers pop b then a.
#define BIN32(expr)            \
    {                          \
        const u32 b = pop32(); \
        const u32 a = pop32(); \
        push32(expr);          \
        return;                \
    }
#define BIN64(expr)            \
    {                          \
        const u64 b = pop64(); \
        const u64 a = pop64(); \
        push64(expr);          \
        return;                \
    }
#define CMP64(expr)            \
    {                          \
        const u64 b = pop64(); \
        const u64 a = pop64(); \
        push32((expr) ? 1 : 0); \
        return;                \
    }
#define BINF32(expr)             \
    {                            \
        const float b = popf32(); \
        const float a = popf32(); \
        pushf32(expr);           \
        return;                  \
    }
#define BINF64(expr)              \
    {                             \
        const double b = popf64(); \
        const double a = popf64(); \
        pushf64(expr);            \
        return;                   \
    }
#define CMPF32(expr)              \
    {                             \
        const float b = popf32(); \
        const float a = popf32(); \
        push32((expr) ? 1 : 0);   \
        return;                   \
    }
#define CMPF64(expr)               \
    {                              \
        const double b = popf64(); \
        const double a = popf64(); \
        push32((expr) ? 1 : 0);    \
        return;                    \
    }

    switch (in.op)
    {
    case 0x45: push32(pop32() == 0); return;
    case 0x46: BIN32(a == b)
    case 0x47: BIN32(a != b)
    case 0x48: BIN32(i32(a) < i32(b))
    case 0x49: BIN32(a < b)
    case 0x4a: BIN32(i32(a) > i32(b))
    case 0x4b: BIN32(a > b)
    case 0x4c: BIN32(i32(a) <= i32(b))
    case 0x4d: BIN32(a <= b)
    case 0x4e: BIN32(i32(a) >= i32(b))
    case 0x4f: BIN32(a >= b)
    case 0x50: push32(pop64() == 0); return;
    case 0x51: CMP64(a == b)
    case 0x52: CMP64(a != b)
    case 0x53: CMP64(i64(a) < i64(b))
    case 0x54: CMP64(a < b)
    case 0x55: CMP64(i64(a) > i64(b))
    case 0x56: CMP64(a > b)
    case 0x57: CMP64(i64(a) <= i64(b))
    case 0x58: CMP64(a <= b)
    case 0x59: CMP64(i64(a) >= i64(b))
    case 0x5a: CMP64(a >= b)
    case 0x5b: CMPF32(a == b)
    case 0x5c: CMPF32(a != b)
    case 0x5d: CMPF32(a < b)
    case 0x5e: CMPF32(a > b)
    case 0x5f: CMPF32(a <= b)
    case 0x60: CMPF32(a >= b)
    case 0x61: CMPF64(a == b)
    case 0x62: CMPF64(a != b)
    case 0x63: CMPF64(a < b)
    case 0x64: CMPF64(a > b)
    case 0x65: CMPF64(a <= b)
    case 0x66: CMPF64(a >= b)

    case 0x67: push32(static_cast<u32>(std::countl_zero(pop32()))); return;
    case 0x68: push32(static_cast<u32>(std::countr_zero(pop32()))); return;
    case 0x69: push32(static_cast<u32>(std::popcount(pop32()))); return;
    case 0x6a: BIN32(a + b)
    case 0x6b: BIN32(a - b)
    case 0x6c: BIN32(a * b)
    case 0x6d:
    {
        const u32 b = pop32();
        const u32 a = pop32();
        if (b == 0)
            trap("integer divide by zero");
        if (a == 0x80000000u && b == 0xffffffffu)
            trap("integer overflow");
        push32(static_cast<u32>(i32(a) / i32(b)));
        return;
    }
    case 0x6e:
    {
        const u32 b = pop32();
        const u32 a = pop32();
        if (b == 0)
            trap("integer divide by zero");
        push32(a / b);
        return;
    }
    case 0x6f:
    {
        const u32 b = pop32();
        const u32 a = pop32();
        if (b == 0)
            trap("integer divide by zero");
        push32(b == 0xffffffffu ? 0 : static_cast<u32>(i32(a) % i32(b)));
        return;
    }
    case 0x70:
    {
        const u32 b = pop32();
        const u32 a = pop32();
        if (b == 0)
            trap("integer divide by zero");
        push32(a % b);
        return;
    }
    case 0x71: BIN32(a & b)
    case 0x72: BIN32(a | b)
    case 0x73: BIN32(a ^ b)
    case 0x74: BIN32(a << (b & 31))
    case 0x75: BIN32(static_cast<u32>(i32(a) >> (b & 31)))
    case 0x76: BIN32(a >> (b & 31))
    case 0x77: BIN32(std::rotl(a, static_cast<int>(b & 31)))
    case 0x78: BIN32(std::rotr(a, static_cast<int>(b & 31)))

    case 0x79: push64(static_cast<u64>(std::countl_zero(pop64()))); return;
    case 0x7a: push64(static_cast<u64>(std::countr_zero(pop64()))); return;
    case 0x7b: push64(static_cast<u64>(std::popcount(pop64()))); return;
    case 0x7c: BIN64(a + b)
    case 0x7d: BIN64(a - b)
    case 0x7e: BIN64(a * b)
    case 0x7f:
    {
        const u64 b = pop64();
        const u64 a = pop64();
        if (b == 0)
            trap("integer divide by zero");
        if (a == 0x8000000000000000ull && b == ~0ull)
            trap("integer overflow");
        push64(static_cast<u64>(i64(a) / i64(b)));
        return;
    }
    case 0x80:
    {
        const u64 b = pop64();
        const u64 a = pop64();
        if (b == 0)
            trap("integer divide by zero");
        push64(a / b);
        return;
    }
    case 0x81:
    {
        const u64 b = pop64();
        const u64 a = pop64();
        if (b == 0)
            trap("integer divide by zero");
        push64(b == ~0ull ? 0 : static_cast<u64>(i64(a) % i64(b)));
        return;
    }
    case 0x82:
    {
        const u64 b = pop64();
        const u64 a = pop64();
        if (b == 0)
            trap("integer divide by zero");
        push64(a % b);
        return;
    }
    case 0x83: BIN64(a & b)
    case 0x84: BIN64(a | b)
    case 0x85: BIN64(a ^ b)
    case 0x86: BIN64(a << (b & 63))
    case 0x87: BIN64(static_cast<u64>(i64(a) >> (b & 63)))
    case 0x88: BIN64(a >> (b & 63))
    case 0x89: BIN64(std::rotl(a, static_cast<int>(b & 63)))
    case 0x8a: BIN64(std::rotr(a, static_cast<int>(b & 63)))

    case 0x8b: push64(pop64() & 0x7fffffffu); return;
    case 0x8c: push64((pop64() ^ 0x80000000u) & 0xffffffffu); return;
    case 0x8d: pushf32(std::ceil(popf32())); return;
    case 0x8e: pushf32(std::floor(popf32())); return;
    case 0x8f: pushf32(std::trunc(popf32())); return;
    case 0x90: pushf32(std::nearbyint(popf32())); return;
    case 0x91: pushf32(std::sqrt(popf32())); return;
    case 0x92: BINF32(a + b)
    case 0x93: BINF32(a - b)
    case 0x94: BINF32(a * b)
    case 0x95: BINF32(a / b)
    case 0x96: BINF32(wasm_min(a, b))
    case 0x97: BINF32(wasm_max(a, b))
    case 0x98:
    {
        const u64 b = pop64();
        const u64 a = pop64();
        push64((a & 0x7fffffffu) | (b & 0x80000000u));
        return;
    }
    case 0x99: push64(pop64() & 0x7fffffffffffffffull); return;
    case 0x9a: push64(pop64() ^ 0x8000000000000000ull); return;
    case 0x9b: pushf64(std::ceil(popf64())); return;
    case 0x9c: pushf64(std::floor(popf64())); return;
    case 0x9d: pushf64(std::trunc(popf64())); return;
    case 0x9e: pushf64(std::nearbyint(popf64())); return;
    case 0x9f: pushf64(std::sqrt(popf64())); return;
    case 0xa0: BINF64(a + b)
    case 0xa1: BINF64(a - b)
    case 0xa2: BINF64(a * b)
    case 0xa3: BINF64(a / b)
    case 0xa4: BINF64(wasm_min(a, b))
    case 0xa5: BINF64(wasm_max(a, b))
    case 0xa6:
    {
        const u64 b = pop64();
        const u64 a = pop64();
        push64((a & 0x7fffffffffffffffull) | (b & 0x8000000000000000ull));
        return;
    }

    case 0xa7: push32(static_cast<u32>(pop64())); return;
    case 0xa8: push32(static_cast<u32>(trunc_checked<i32>(popf32(), -2147483649.0, 2147483648.0))); return;
    case 0xa9: push32(trunc_checked<u32>(popf32(), -1.0, 4294967296.0)); return;
    case 0xaa: push32(static_cast<u32>(trunc_checked<i32>(popf64(), -2147483649.0, 2147483648.0))); return;
    case 0xab: push32(trunc_checked<u32>(popf64(), -1.0, 4294967296.0)); return;
    case 0xac: push64(static_cast<u64>(i64{i32(pop32())})); return;
    case 0xad: push64(pop32()); return;
    case 0xae: push64(static_cast<u64>(trunc_checked<i64>(popf32(), -9223372036854777856.0, 9223372036854775808.0))); return;
    case 0xaf: push64(trunc_checked<u64>(popf32(), -1.0, 18446744073709551616.0)); return;
    case 0xb0: push64(static_cast<u64>(trunc_checked<i64>(popf64(), -9223372036854777856.0, 9223372036854775808.0))); return;
    case 0xb1: push64(trunc_checked<u64>(popf64(), -1.0, 18446744073709551616.0)); return;
    case 0xb2: pushf32(static_cast<float>(i32(pop32()))); return;
    case 0xb3: pushf32(static_cast<float>(pop32())); return;
    case 0xb4: pushf32(static_cast<float>(i64(pop64()))); return;
    case 0xb5: pushf32(static_cast<float>(pop64())); return;
    case 0xb6: pushf32(static_cast<float>(popf64())); return;
    case 0xb7: pushf64(static_cast<double>(i32(pop32()))); return;
    case 0xb8: pushf64(static_cast<double>(pop32())); return;
    case 0xb9: pushf64(static_cast<double>(i64(pop64()))); return;
    case 0xba: pushf64(static_cast<double>(pop64())); return;
    case 0xbb: pushf64(static_cast<double>(popf32())); return;
    case 0xbc:
    case 0xbd:
    case 0xbe:
    case 0xbf:
        return;  // reinterpretations keep the bits
    case 0xc0: push32(static_cast<u32>(i32{static_cast<std::int8_t>(pop32())})); return;
    case 0xc1: push32(static_cast<u32>(i32{static_cast<std::int16_t>(pop32())})); return;
    case 0xc2: push64(static_cast<u64>(i64{static_cast<std::int8_t>(pop64())})); return;
    case 0xc3: push64(static_cast<u64>(i64{static_cast<std::int16_t>(pop64())})); return;
    case 0xc4: push64(static_cast<u64>(i64{static_cast<i32>(pop64())})); return;

    case prefixed(0xfc, 0): push32(static_cast<u32>(trunc_sat<i32>(popf32()))); return;
    case prefixed(0xfc, 1): push32(trunc_sat<u32>(popf32())); return;
    case prefixed(0xfc, 2): push32(static_cast<u32>(trunc_sat<i32>(popf64()))); return;
    case prefixed(0xfc, 3): push32(trunc_sat<u32>(popf64())); return;
    case prefixed(0xfc, 4): push64(static_cast<u64>(trunc_sat<i64>(popf32()))); return;
    case prefixed(0xfc, 5): push64(trunc_sat<u64>(popf32())); return;
    case prefixed(0xfc, 6): push64(static_cast<u64>(trunc_sat<i64>(popf64()))); return;
    case prefixed(0xfc, 7): push64(trunc_sat<u64>(popf64())); return;
    default:
        throw Error{Errc::UnsupportedFeature, "mock cannot execute " + opcode_name(in.op)};
    }
#undef BIN32
#undef BIN64
#undef CMP64
#undef BINF32
#undef BINF64
#undef CMPF32
#undef CMPF64
}

bool supported_opcode(const OpInfo& info)
{
    switch (info.cls)
    {
    case OpClass::Control:
        return info.code != op::call_indirect && info.code != op::return_call &&
               info.code != op::return_call_indirect;
    case OpClass::Other:
        return info.code == op::memory_size || info.code == op::memory_grow;
    default:
        return true;
    }
}
}  // namespace

CostModel CostModel::parse(std::string_view text)
{
    CostModel cm;
    std::istringstream in{std::string{text}};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls{line};
        std::vector<std::string> w;
        for (std::string t; ls >> t;)
            w.push_back(t);
        if (w.empty())
            continue;
        const auto& key = w[0];
        if (key == "default" && w.size() == 2)
            cm.default_cost = parse_number<std::uint64_t>(w[1], lineno);
        else if (key == "cost" && w.size() == 3)
        {
            if (op_info(w[1]) == nullptr)
                config_error(lineno, "unknown opcode '" + w[1] + "'");
            cm.base[w[1]] = parse_number<std::uint64_t>(w[2], lineno);
            if (cm.base[w[1]] == 0)
                config_error(lineno, "costs must be positive");
        }
        else if (key == "multiplier" && w.size() >= 3)
        {
            Multiplier m;
            m.pattern = w[1];
            m.factor = parse_number<double>(w[2], lineno);
            if (!(m.factor > 0))
                config_error(lineno, "factor must be positive");
            std::size_t i = 3;
            if (i < w.size())
            {
                if (w[i] != "expand" || i + 1 >= w.size())
                    config_error(lineno, "expected 'expand <n>'");
                m.expand = parse_number<std::size_t>(w[i + 1], lineno);
                i += 2;
                if (i < w.size())
                {
                    if (w[i] != "as" || i + 1 >= w.size() || i + 2 != w.size())
                        config_error(lineno, "expected 'as <mnemonic>'");
                    m.name = w[i + 1];
                }
            }
            cm.multipliers.push_back(std::move(m));
        }
        else if (key == "loop_amplification" && w.size() == 2 && (w[1] == "true" || w[1] == "false"))
            cm.loop_amplification = w[1] == "true";
        else if (key == "step_budget" && w.size() == 2)
            cm.step_budget = parse_number<std::uint64_t>(w[1], lineno);
        else
            config_error(lineno, "unrecognized directive '" + line + "'");
    }
    if (cm.default_cost == 0)
        throw Error{Errc::ConfigError, "default cost must be positive"};
    return cm;
}

CostModel CostModel::load(const std::filesystem::path& file)
{
    std::ifstream in{file};
    if (!in)
        throw Error{Errc::ConfigError, "cannot read cost model " + file.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string CostModel::to_text() const
{
    std::string out = fmt::format("default {}\n", default_cost);
    for (const auto& [k, v] : base)
        out += fmt::format("cost {} {}\n", k, v);
    for (const auto& m : multipliers)
    {
        out += fmt::format("multiplier {} {}", m.pattern, m.factor);
        if (m.expand > 0)
            out += fmt::format(" expand {}", m.expand);
        if (m.expand > 0 && !m.name.empty())
            out += fmt::format(" as {}", m.name);
        out += '\n';
    }
    out += fmt::format("loop_amplification {}\nstep_budget {}\n", loop_amplification ? "true" : "false", step_budget);
    return out;
}

const Multiplier* CostModel::multiplier_for(std::string_view opcode) const
{
    const std::string name{opcode};
    for (const auto& m : multipliers)
        if (::fnmatch(m.pattern.c_str(), name.c_str(), 0) == 0)
            return &m;
    return nullptr;
}

std::uint64_t CostModel::cost(std::string_view opcode) const
{
    const auto it = base.find(opcode);
    const std::uint64_t b = it == base.end() ? default_cost : it->second;
    const auto* m = multiplier_for(opcode);
    if (m == nullptr)
        return b;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(static_cast<double>(b) * m->factor)));
}

std::string CostModel::expansion_name(const Multiplier& m, std::string_view opcode)
{
    if (!m.name.empty())
        return m.name;
    auto stem = opcode;
    if (const auto dot = stem.find('.'); dot != std::string_view::npos)
        stem = stem.substr(dot + 1);
    if (const auto us = stem.find('_'); us != std::string_view::npos)
        stem = stem.substr(0, us);
    return std::string{stem} + "_expand";
}

std::string format_value(const Value& v)
{
    switch (v.type)
    {
    case ValType::i32:
        return fmt::format("i32:{}", static_cast<std::int32_t>(v.bits));
    case ValType::i64:
        return fmt::format("i64:{}", static_cast<std::int64_t>(v.bits));
    case ValType::f32:
    {
        const float f = f32_of(v.bits);
        if (std::isnan(f))
            return fmt::format("f32:nan:0x{:08x}", v.bits & 0xffffffffu);
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, f);
        return "f32:" + std::string{buf, r.ptr};
    }
    case ValType::f64:
    {
        const double d = f64_of(v.bits);
        if (std::isnan(d))
            return fmt::format("f64:nan:0x{:016x}", v.bits);
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, d);
        return "f64:" + std::string{buf, r.ptr};
    }
    default:
        return "?";
    }
}

std::string MockResult::output() const
{
    std::string out;
    for (const auto& v : results)
        out += format_value(v) + '\n';
    return out;
}

void check_supported(const Module& m)
{
    if (!m.imports.empty())
        throw Error{Errc::UnsupportedFeature, "the mock runtime does not provide imports"};
    if (!m.tables.empty() || m.elements)
        throw Error{Errc::UnsupportedFeature, "the mock runtime does not support tables"};
    if (!m.opaque.empty())
        throw Error{Errc::UnsupportedFeature, "module uses undecoded sections"};
    for (const auto& t : m.types)
    {
        for (const auto v : t.params)
            if (!is_numeric(v))
                throw Error{Errc::UnsupportedFeature, "non-numeric parameter type"};
        for (const auto v : t.results)
            if (!is_numeric(v))
                throw Error{Errc::UnsupportedFeature, "non-numeric result type"};
    }
    for (const auto& g : m.globals)
        if (!is_numeric(g.type.type))
            throw Error{Errc::UnsupportedFeature, "non-numeric global"};
    for (const auto& f : m.functions)
    {
        if (!f.unsupported.empty())
            throw Error{Errc::UnsupportedFeature, f.unsupported};
        for (const auto t : f.locals)
            if (!is_numeric(t))
                throw Error{Errc::UnsupportedFeature, "non-numeric local in function " + std::to_string(f.index)};
        for (const auto& r : f.instructions)
        {
            const auto* info = op_info(r.instr.op);
            if (info == nullptr || !supported_opcode(*info))
                throw Error{Errc::UnsupportedFeature,
                            "mock cannot execute " + opcode_name(r.instr.op) + " in function " + std::to_string(f.index)};
        }
    }
}

std::uint32_t resolve_entry(const Module& m, std::string_view entry)
{
    if (!entry.empty())
    {
        if (const auto f = m.exported_function(entry))
            return *f;
        throw Error{Errc::ConfigError, "no exported function '" + std::string{entry} + "'"};
    }
    for (const char* name : {"_start", "main"})
        if (const auto f = m.exported_function(name))
            return *f;
    for (const auto& e : m.exports)
        if (e.kind == ExternKind::Func)
            return e.index;
    throw Error{Errc::ConfigError, "module exports no function to run"};
}

MockResult interpret_with_cost(const Module& m, const CostModel& model, std::string_view entry)
{
    check_supported(m);
    const auto func = resolve_entry(m, entry);
    MockResult result;
    Machine machine{m, model};
    try
    {
        machine.instantiate();
        const auto raw = machine.call_entry(func);
        const auto& t = m.function_type(func);
        for (std::size_t i = 0; i < raw.size(); ++i)
            result.results.push_back({t.results[i], raw[i]});
    }
    catch (const TrapSignal& t)
    {
        result.status = Status::Trap;
        result.trap = t.message;
    }
    catch (const BudgetSignal&)
    {
        result.status = Status::BudgetExceeded;
    }
    result.pseudo_time = machine.pseudo_time;
    result.steps = machine.steps;
    return result;
}

dis::Disassembly mock_dump(const Module& m, const CostModel& model)
{
    dis::Disassembly d;
    std::uint64_t addr = 0;
    for (const auto& f : m.functions)
    {
        dis::DisassembledFunction df;
        df.index = f.index;
        df.symbol = "func" + std::to_string(f.index);
        df.start = addr;
        for (const auto& r : f.instructions)
        {
            const auto* info = op_info(r.instr.op);
            const std::string name = info ? std::string{info->name} : opcode_name(r.instr.op);
            dis::MachineInstr mi;
            write_instr(mi.bytes, r.instr);
            const auto* mult = model.multiplier_for(name);
            if (mult != nullptr && mult->expand > 0)
            {
                mi.mnemonic = CostModel::expansion_name(*mult, name);
                for (std::size_t k = 0; k < mult->expand; ++k)
                {
                    mi.address = addr++;
                    df.instructions.push_back(mi);
                }
                continue;
            }
            mi.mnemonic = name;
            const auto text = instr_text(r.instr);
            mi.operands = text.size() > name.size() ? text.substr(name.size() + 1) : "";
            mi.address = addr++;
            df.instructions.push_back(std::move(mi));
        }
        d.functions.push_back(std::move(df));
    }
    return d;
}

MockRuntime::MockRuntime(std::string name, harness::Role role, CostModel model) : model_{std::move(model)}
{
    spec_.name = std::move(name);
    spec_.role = role;
    spec_.invoke = "mock:" + spec_.name + " {module}";
    spec_.dump = "mock-dump:" + spec_.name + " {module}";
    spec_.timing = harness::TimingSource::Reported;
    spec_.env["cost_model"] = model_.to_text();
}

harness::RunRecord MockRuntime::run(const std::filesystem::path& module, std::chrono::duration<double>) const
{
    std::ifstream in{module, std::ios::binary};
    if (!in)
        throw Error{Errc::SpawnFailure, "cannot open module " + module.string()};
    const Bytes bytes{std::istreambuf_iterator<char>{in}, {}};
    const auto start = std::chrono::steady_clock::now();
    harness::RunRecord rec;
    try
    {
        const auto res = interpret_with_cost(parse_module(bytes), model_);
        rec.output = res.output();
        rec.reported = static_cast<double>(res.pseudo_time);
        rec.trapped = res.status == Status::Trap;
        rec.timed_out = res.status == Status::BudgetExceeded;
        rec.exit_status = rec.trapped ? 3 : rec.timed_out ? 4 : 0;
        rec.diagnostics = res.trap;
    }
    catch (const Error& e)
    {
        rec.exit_status = 1;
        rec.diagnostics = e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::string MockRuntime::dump(const std::filesystem::path& module) const
{
    std::ifstream in{module, std::ios::binary};
    if (!in)
        throw Error{Errc::DumpParseError, "cannot open module " + module.string()};
    const Bytes bytes{std::istreambuf_iterator<char>{in}, {}};
    return dis::render_listing(mock_dump(parse_module(bytes), model_));
}
}  // namespace warplens::mock
