// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "warplens/mutation.hpp"
#include "warplens/validator.hpp"
#include <gtest/gtest.h>
#include <map>

using namespace warplens;
using namespace warplens::wasm;
using namespace warplens::mutate;
using namespace warplens::testing;

namespace
{
std::vector<std::string> afters(const std::vector<Mutant>& ms)
{
    std::vector<std::string> out;
    for (const auto& m : ms)
        out.push_back(m.after);
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

// Net stack effect of a straight-line span: values taken from below the span
// and values left on top, both as type lists.
struct Effect
{
    std::vector<ValType> consumed;
    std::vector<ValType> produced;
    bool operator==(const Effect&) const = default;
};

Effect stack_effect(const std::vector<InstrRecord>& span)
{
    Effect e;
    for (const auto& r : span)
    {
        EXPECT_TRUE(r.signature.has_value()) << instr_text(r.instr);
        const auto& s = *r.signature;
        for (auto it = s.params.rbegin(); it != s.params.rend(); ++it)
        {
            if (!e.produced.empty())
            {
                EXPECT_EQ(e.produced.back(), *it);
                e.produced.pop_back();
            }
            else
                e.consumed.insert(e.consumed.begin(), *it);
        }
        e.produced.insert(e.produced.end(), s.results.begin(), s.results.end());
    }
    return e;
}

std::multiset<Opcode> control_ops(const Module& m)
{
    std::multiset<Opcode> out;
    for (const auto& f : m.functions)
        for (const auto& r : f.instructions)
            if (r.category == InstrCategory::Control)
                out.insert(r.instr.op);
    return out;
}

const std::vector<ValType> i32x2{ValType::i32, ValType::i32};
}  // namespace

TEST(Mutation, SitesForConstantAddition)
{
    const auto m = build_module({{}, {ValType::i32}, {}, {make_i32_const(5), make_i32_const(3), ins("i32.add")}});
    const std::vector<MutationSite> expected{
        {0, 0, 1, Rule::OperandSubst},
        {0, 1, 1, Rule::OperandSubst},
        {0, 2, 1, Rule::OperatorSubst},
        {0, 0, 3, Rule::OperatorDelete},
    };
    EXPECT_EQ(enumerate_mutation_sites(m), expected);
}

TEST(Mutation, DeletionRequiresOperandProducedOperands)
{
    const auto m = build_module({i32x2,
                                 {ValType::i32},
                                 {},
                                 {ins(op::local_get, 0), ins(op::local_get, 1), ins("i32.add"), make_i32_const(1),
                                  ins("i32.add")}});
    std::vector<MutationSite> deletions;
    for (const auto& s : enumerate_mutation_sites(m))
        if (s.rule == Rule::OperatorDelete)
            deletions.push_back(s);
    ASSERT_EQ(deletions.size(), 1u);
    EXPECT_EQ(deletions[0], (MutationSite{0, 0, 3, Rule::OperatorDelete}));
    EXPECT_THROW((void)apply_rule3(m, {0, 3, 2, Rule::OperatorDelete}), Error);
    try
    {
        (void)apply_rule3(m, {0, 3, 2, Rule::OperatorDelete});
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::IllegalSpan);
    }
}

TEST(Mutation, ControlOnlyBodyHasNoSites)
{
    const auto m = parse_module(read_file(corpus_dir() / "control_only.wasm"));
    EXPECT_TRUE(enumerate_mutation_sites(m).empty());
    EXPECT_TRUE(generate_all_mutants(m).mutants.empty());
    const auto empty = parse_module(read_file(corpus_dir() / "empty.wasm"));
    EXPECT_TRUE(generate_all_mutants(empty).mutants.empty());
}

TEST(Mutation, Rule1NegativeConstantOffersItsNegation)
{
    const auto m = build_module({{ValType::i32},
                                 {},
                                 {ValType::i64},
                                 {make_i32_const(-65537), ins(op::global_set, 0)},
                                 {{ValType::i32, true}}});
    const auto ms = apply_rule1(m, {0, 0, 1, Rule::OperandSubst});
    const std::vector<std::string> expected{"i32.const 0",          "i32.const 1", "i32.const -1",
                                            "i32.const 2147483647", "i32.const 65537", "local.get 0",
                                            "global.get 0"};
    EXPECT_EQ(afters(ms), expected);
    for (const auto& x : ms)
    {
        EXPECT_EQ(x.before, "i32.const -65537");
        EXPECT_TRUE(validate_module(x.bytes)) << x.after;
    }
}

TEST(Mutation, Rule1FloatOneBecomesZero)
{
    const auto m = build_module({{ValType::f64}, {ValType::f64}, {}, {make_f64_const(1.0), ins(op::local_get, 0), ins("f64.mul")}});
    const auto out = afters(apply_rule1(m, {0, 0, 1, Rule::OperandSubst}));
    const std::vector<std::string> expected{"f64.const 0.0", "f64.const -1.0", "local.get 0"};
    EXPECT_EQ(out, expected);
}

TEST(Mutation, Rule1LocalGetBecomesPoolConstants)
{
    const auto m = build_module({{ValType::i32}, {ValType::i32}, {}, {ins(op::local_get, 0)}});
    const auto out = afters(apply_rule1(m, {0, 0, 1, Rule::OperandSubst}));
    ASSERT_FALSE(out.empty());
    EXPECT_EQ(out.front(), "i32.const 0");
    EXPECT_EQ(out.size(), 4u);
}

TEST(Mutation, Rule1FusedLoadPairCollapsesToConstant)
{
    auto load = ins("i64.load");
    load.idx = 3;
    const auto m = build_module({{}, {ValType::i64}, {}, {make_i32_const(8), load}, {}, true});
    const auto sites = enumerate_mutation_sites(m);
    ASSERT_EQ(sites.size(), 2u);
    EXPECT_EQ(sites[0], (MutationSite{0, 0, 1, Rule::OperandSubst}));
    EXPECT_EQ(sites[1], (MutationSite{0, 0, 2, Rule::OperandSubst}));
    const auto ms = apply_rule1(m, sites[1]);
    const std::vector<std::string> expected{"i64.const 0", "i64.const 1", "i64.const -1",
                                            "i64.const 9223372036854775807"};
    EXPECT_EQ(afters(ms), expected);
    EXPECT_EQ(ms[0].before, "i32.const 8; i64.load");
    const auto mm = parse_module(ms[0].bytes);
    EXPECT_EQ(mm.functions[0].instructions.size(), 1u);
}

TEST(Mutation, Rule2SubstitutesWithinSignatureGroup)
{
    const auto m = build_module({{ValType::i64, ValType::i64},
                                 {ValType::i64},
                                 {},
                                 {ins(op::local_get, 0), ins(op::local_get, 1), ins("i64.div_u")}});
    const auto ms = apply_rule2(m, {0, 2, 1, Rule::OperatorSubst});
    const auto out = afters(ms);
    EXPECT_TRUE(contains(out, "i64.sub"));
    EXPECT_FALSE(contains(out, "i64.div_u"));
    EXPECT_EQ(out.size(), substitution_group({{ValType::i64, ValType::i64}, {ValType::i64}}).size() - 1);

    const auto cmp = build_module({{ValType::i64, ValType::i64},
                                   {ValType::i32},
                                   {},
                                   {ins(op::local_get, 0), ins(op::local_get, 1), ins("i64.eq")}});
    const auto cmp_out = afters(apply_rule2(cmp, {0, 2, 1, Rule::OperatorSubst}));
    ASSERT_EQ(cmp_out.size(), 9u);
    EXPECT_EQ(cmp_out[0], "i64.ne");
    EXPECT_EQ(cmp_out[1], "i64.lt_s");
}

TEST(Mutation, Rule2SingletonGroupYieldsNothing)
{
    const auto m = build_module({{ValType::f32}, {ValType::f64}, {}, {ins(op::local_get, 0), ins("f64.promote_f32")}});
    EXPECT_TRUE(apply_rule2(m, {0, 1, 1, Rule::OperatorSubst}).empty());
}

TEST(Mutation, Rule3Replacements)
{
    const auto add = build_module({{}, {ValType::i32}, {}, {make_i32_const(5), make_i32_const(3), ins("i32.add")}});
    EXPECT_EQ(apply_rule3(add, {0, 0, 3, Rule::OperatorDelete}).after, "i32.const 0");

    const auto eqz = build_module({{ValType::i64}, {ValType::i32}, {}, {ins(op::local_get, 0), ins("i64.eqz")}});
    const auto e = apply_rule3(eqz, {0, 0, 2, Rule::OperatorDelete});
    EXPECT_EQ(e.after, "i32.const 0");
    EXPECT_EQ(e.before, "local.get 0; i64.eqz");

    const auto store = build_module({{}, {}, {}, {make_i32_const(8), make_i32_const(7), ins("i32.store")}, {}, true});
    const auto s = apply_rule3(store, {0, 0, 3, Rule::OperatorDelete});
    EXPECT_EQ(s.after, "");
    EXPECT_TRUE(s.replacement.empty());
    EXPECT_TRUE(validate_module(s.bytes));
    const auto body = parse_module(s.bytes).functions[0].instructions;
    EXPECT_TRUE(body.empty());
}

TEST(Mutation, LocalTeeIsNotDeleted)
{
    const auto m = build_module({{ValType::i32}, {ValType::i32}, {}, {make_i32_const(3), ins(op::local_tee, 0)}});
    for (const auto& s : enumerate_mutation_sites(m))
        EXPECT_NE(s.rule, Rule::OperatorDelete);
}

TEST(Mutation, MotivatingProgramYieldsPositiveConstantMutant)
{
    const auto m = parse_module(read_file(corpus_dir() / "motivating.wasm"));
    const auto result = generate_all_mutants(m);
    bool found = false;
    for (const auto& x : result.mutants)
        if (x.site.rule == Rule::OperandSubst && x.before == "i32.const -65537" && x.after == "i32.const 65537")
            found = true;
    EXPECT_TRUE(found);
}

TEST(Mutation, CorpusMutantsAreValidMinimalAndTypePreserving)
{
    std::size_t total = 0;
    for (const auto& f : corpus_files())
    {
        SCOPED_TRACE(f.filename().string());
        const auto model = parse_module(read_file(f));
        const auto result = generate_all_mutants(model);
        EXPECT_EQ(result.stats.invalid, 0u);
        EXPECT_EQ(result.mutants.size() + result.stats.duplicates + result.stats.invalid + result.stats.truncated,
                  result.stats.candidates);
        total += result.mutants.size();
        const auto controls = control_ops(model);

        for (const auto& x : result.mutants)
        {
            SCOPED_TRACE(std::to_string(x.ordinal) + " " + x.before + " -> " + x.after);
            const auto verdict = validate_module(x.bytes);
            ASSERT_TRUE(verdict) << verdict.describe();
            const auto mm = parse_module(x.bytes);
            EXPECT_EQ(control_ops(mm), controls);

            ASSERT_EQ(mm.functions.size(), model.functions.size());
            for (std::size_t i = 0; i < model.functions.size(); ++i)
                if (model.functions[i].index != x.site.function)
                    EXPECT_EQ(mm.functions[i], model.functions[i]);

            const auto& a = model.find_function(x.site.function)->instructions;
            const auto& b = mm.find_function(x.site.function)->instructions;
            std::size_t prefix = 0;
            while (prefix < a.size() && prefix < b.size() && a[prefix].instr == b[prefix].instr)
                ++prefix;
            std::size_t suffix = 0;
            while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
                   a[a.size() - 1 - suffix].instr == b[b.size() - 1 - suffix].instr)
                ++suffix;
            const bool single = x.site.rule == Rule::OperatorSubst || (x.site.rule == Rule::OperandSubst && x.site.span == 1);
            if (single)
            {
                ASSERT_EQ(a.size(), b.size());
                std::size_t differing = 0;
                for (std::size_t i = 0; i < a.size(); ++i)
                    differing += a[i].instr != b[i].instr;
                EXPECT_EQ(differing, 1u);
                EXPECT_EQ(prefix, x.site.offset);
            }
            // The edited window of the original lies inside the site's span.
            EXPECT_GE(prefix, x.site.offset);
            EXPECT_LE(a.size() - suffix, x.site.offset + x.site.span);

            const std::vector<InstrRecord> before(a.begin() + static_cast<long>(x.site.offset),
                                                  a.begin() + static_cast<long>(x.site.offset + x.site.span));
            const std::vector<InstrRecord> after(
                b.begin() + static_cast<long>(x.site.offset),
                b.begin() + static_cast<long>(x.site.offset + x.replacement.size()));
            EXPECT_EQ(stack_effect(before), stack_effect(after));
        }
    }
    EXPECT_GE(total, 200u);
}

TEST(Mutation, RecountMatchesCandidateTotal)
{
    // Count candidates from the model directly, without the site enumerator.
    const auto pool = ImmediatePool::defaults();
    for (const auto& f : corpus_files())
    {
        const auto model = parse_module(read_file(f));
        std::size_t expected = 0;
        for (const auto& fn : model.functions)
        {
            if (!fn.is_mutable)
                continue;
            const auto& r = fn.instructions;
            const auto operand_at = [&](std::size_t end) -> std::optional<std::size_t> {
                if (end == 0 || r[end - 1].category != InstrCategory::Operand)
                    return std::nullopt;
                return r[end - 1].fused ? end - 2 : end - 1;
            };
            for (std::size_t i = 0; i < r.size(); ++i)
            {
                const auto* info = op_info(r[i].instr.op);
                if (r[i].category == InstrCategory::Operand)
                {
                    const ValType t = r[i].signature->results[0];
                    if (!r[i].fused && info->cls == OpClass::Const)
                    {
                        std::set<std::uint64_t> values(pool.for_type(t).begin(), pool.for_type(t).end());
                        const std::uint64_t mask = (t == ValType::i32 || t == ValType::f32) ? 0xffffffffull : ~0ull;
                        const std::uint64_t bits = r[i].instr.imm & mask;
                        const bool zero = (t == ValType::f32 || t == ValType::f64) ? ((bits << 1) & mask) == 0 : bits == 0;
                        if (!zero)
                        {
                            const std::uint64_t sign = (t == ValType::f32) ? 0x80000000ull : 0x8000000000000000ull;
                            values.insert((t == ValType::f32 || t == ValType::f64) ? (bits ^ sign) : ((0 - bits) & mask));
                        }
                        values.erase(bits);
                        expected += values.size();
                        expected += std::count(fn.locals.begin(), fn.locals.end(), t);
                        for (std::uint32_t g = 0; g < model.global_count(); ++g)
                            expected += model.global_type(g).type == t;
                    }
                    else
                        expected += pool.for_type(t).size();
                }
                else if (r[i].category == InstrCategory::Operator)
                {
                    if (info->cls == OpClass::Numeric)
                        expected += substitution_group(*r[i].signature).size() - 1;
                    if (info->cls != OpClass::LocalTee)
                    {
                        std::optional<std::size_t> start = i;
                        for (std::size_t k = 0; k < r[i].signature->params.size() && start; ++k)
                            start = operand_at(*start);
                        expected += start.has_value();
                    }
                }
            }
        }
        EXPECT_EQ(generate_all_mutants(model).stats.candidates, expected) << f.filename();
    }
}

TEST(Mutation, GenerationIsDeterministic)
{
    const auto model = parse_module(read_file(corpus_dir() / "control_flow.wasm"));
    const auto a = generate_all_mutants(model);
    const auto b = generate_all_mutants(model);
    ASSERT_EQ(a.mutants.size(), b.mutants.size());
    for (std::size_t i = 0; i < a.mutants.size(); ++i)
    {
        EXPECT_EQ(a.mutants[i].bytes, b.mutants[i].bytes);
        EXPECT_EQ(a.mutants[i].ordinal, i + 1);
        EXPECT_EQ(a.mutants[i].site, b.mutants[i].site);
    }
}

TEST(Mutation, CapTruncatesInEnumerationOrder)
{
    const auto model = parse_module(read_file(corpus_dir() / "arith_mix.wasm"));
    const auto full = generate_all_mutants(model);
    MutationConfig cfg;
    cfg.cap = 5;
    const auto capped = generate_all_mutants(model, cfg);
    ASSERT_EQ(capped.mutants.size(), 5u);
    EXPECT_EQ(capped.stats.truncated, full.mutants.size() - 5);
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_EQ(capped.mutants[i].bytes, full.mutants[i].bytes);
}

TEST(Mutation, DuplicatesAreRemoved)
{
    // Deleting either of two identical stores leaves the same body.
    const auto m = build_module({{},
                                 {},
                                 {},
                                 {make_i32_const(8), make_i32_const(7), ins("i32.store"), make_i32_const(8),
                                  make_i32_const(7), ins("i32.store")},
                                 {},
                                 true});
    const auto r = generate_all_mutants(m);
    std::set<Bytes> uniq;
    for (const auto& x : r.mutants)
        EXPECT_TRUE(uniq.insert(x.bytes).second);
    EXPECT_GT(r.stats.duplicates, 0u);
}

TEST(Mutation, PoolOverridesAndParsing)
{
    EXPECT_EQ(parse_pool(ValType::i32, "0, 7,-1"), (std::vector<std::uint64_t>{0, 7, 0xffffffffu}));
    EXPECT_EQ(parse_pool(ValType::f64, "2.5"), (std::vector<std::uint64_t>{std::bit_cast<std::uint64_t>(2.5)}));
    EXPECT_THROW((void)parse_pool(ValType::i32, "abc"), Error);
    EXPECT_THROW((void)parse_pool(ValType::i32, "99999999999"), Error);

    MutationConfig cfg;
    cfg.pool.i32 = {42};
    cfg.pool.negate_original = false;
    const auto m = build_module({{}, {ValType::i32}, {}, {make_i32_const(5)}});
    const auto r = generate_all_mutants(m, cfg);
    ASSERT_EQ(r.mutants.size(), 1u);
    EXPECT_EQ(r.mutants[0].after, "i32.const 42");
}

TEST(Mutation, PersistAndManifestRoundTrip)
{
    const auto dir = std::filesystem::temp_directory_path() / "warplens_test_persist";
    std::filesystem::remove_all(dir);
    const auto model = parse_module(read_file(corpus_dir() / "dead_division.wasm"));
    const auto r = generate_all_mutants(model);
    persist_mutants(dir, r.mutants);
    const auto entries = read_manifest(dir / "manifest.jsonl");
    ASSERT_EQ(entries.size(), r.mutants.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
    {
        const auto& m = r.mutants[i];
        EXPECT_EQ(entries[i].ordinal, m.ordinal);
        EXPECT_EQ(entries[i].rule, m.site.rule);
        EXPECT_EQ(entries[i].before, m.before);
        EXPECT_EQ(entries[i].after, m.after);
        EXPECT_EQ(read_file(dir / entries[i].file), m.bytes);
        EXPECT_EQ(entries[i].file, "mutant_" + std::to_string(m.ordinal) + "_" + std::string{rule_name(m.site.rule)} + ".wasm");
    }
    std::filesystem::remove_all(dir);
}
