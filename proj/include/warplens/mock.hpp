// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/disassembly.hpp"
#include "warplens/harness.hpp"
#include "warplens/module.hpp"
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace warplens::mock
{
/// Scales the cost of every opcode matching a glob pattern. With `expand` > 0
/// the pseudo-dump renders each matching instruction as `expand` copies of
/// `name` (default `<stem>_expand`, e.g. `div_expand` for `i64.div_u`).
struct Multiplier
{
    std::string pattern;
    double factor = 1.0;
    std::size_t expand = 0;
    std::string name;
    bool operator==(const Multiplier&) const = default;
};

/// Text format, one directive per line, `#` starts a comment:
///   default <n>
///   cost <opcode> <n>
///   multiplier <glob> <factor> [expand <n> [as <mnemonic>]]
///   loop_amplification true|false
///   step_budget <n>
struct CostModel
{
    std::uint64_t default_cost = 1;
    std::map<std::string, std::uint64_t, std::less<>> base;
    std::vector<Multiplier> multipliers;
    /// When false, each static instruction is charged on its first execution only.
    bool loop_amplification = true;
    std::uint64_t step_budget = 100'000'000;

    static CostModel uniform() { return {}; }
    static CostModel parse(std::string_view text);
    static CostModel load(const std::filesystem::path& file);
    std::string to_text() const;

    const Multiplier* multiplier_for(std::string_view opcode) const;
    std::uint64_t cost(std::string_view opcode) const;
    static std::string expansion_name(const Multiplier& m, std::string_view opcode);

    bool operator==(const CostModel&) const = default;
};

enum class Status : std::uint8_t
{
    Ok,
    Trap,
    BudgetExceeded,
};

struct Value
{
    wasm::ValType type = wasm::ValType::i32;
    std::uint64_t bits = 0;
    bool operator==(const Value&) const = default;
};

/// `i32:-5`, `f64:2.5`; NaNs as `f32:nan:0x7fc00000`.
std::string format_value(const Value& v);

struct MockResult
{
    Status status = Status::Ok;
    std::string trap;
    std::vector<Value> results;
    std::uint64_t pseudo_time = 0;
    std::uint64_t steps = 0;

    /// Result lines as printed by `mock-run`.
    std::string output() const;
};

/// Throws Error{UnsupportedFeature} for constructs outside the interpreted
/// subset (imports, tables, indirect calls, SIMD, reference types, undecoded bodies).
void check_supported(const wasm::Module& m);

/// `entry` names an export; empty picks `_start`, then `main`, then the
/// first exported function.
std::uint32_t resolve_entry(const wasm::Module& m, std::string_view entry);

MockResult interpret_with_cost(const wasm::Module& m, const CostModel& model, std::string_view entry = {});

/// One pseudo-instruction per Wasm instruction (expansions per the model),
/// with consecutive addresses across all defined functions.
dis::Disassembly mock_dump(const wasm::Module& m, const CostModel& model);

/// In-process runtime over the interpreter, reporting pseudo-time.
class MockRuntime final : public harness::Runtime
{
public:
    MockRuntime(std::string name, harness::Role role, CostModel model);
    const harness::RuntimeSpec& spec() const override { return spec_; }
    harness::RunRecord run(const std::filesystem::path& module, std::chrono::duration<double> timeout) const override;
    std::string dump(const std::filesystem::path& module) const override;
    const CostModel& model() const noexcept { return model_; }

private:
    harness::RuntimeSpec spec_;
    CostModel model_;
};
}  // namespace warplens::mock
