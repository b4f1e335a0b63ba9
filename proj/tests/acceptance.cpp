// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "warplens/error.hpp"
#include "warplens/machine_diff.hpp"
#include "warplens/mock.hpp"
#include "warplens/mutation.hpp"
#include "warplens/pipeline.hpp"
#include "warplens/reduction.hpp"
#include "warplens/selector.hpp"
#include "warplens/validator.hpp"
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <random>

using namespace warplens;
namespace fs = std::filesystem;
using warplens::testing::corpus_dir;
using warplens::testing::read_file;

namespace
{
struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && pass)
        {
            pass = false;
            detail = what;
        }
    }
};

wasm::Module load(const std::string& name)
{
    return wasm::parse_module(read_file(corpus_dir() / name));
}

// ---- 1 ----

Outcome mutant_validity()
{
    Outcome o;
    std::size_t modules = 0;
    std::size_t mutants = 0;
    for (const auto& file : warplens::testing::corpus_files())
    {
        const auto bytes = read_file(file);
        if (!wasm::validate_module(bytes))
            continue;
        ++modules;
        for (const auto& m : mutate::generate_all_mutants(wasm::parse_module(bytes)).mutants)
        {
            ++mutants;
            const auto v = wasm::validate_module(m.bytes);
            o.require(v.ok, fmt::format("{} mutant {}: {}", file.filename().string(), m.ordinal, v.describe()));
        }
    }
    o.require(modules >= 10, fmt::format("only {} modules", modules));
    o.require(mutants >= 200, fmt::format("only {} mutants", mutants));
    if (o.pass)
        o.detail = fmt::format("{} mutants from {} modules all validate", mutants, modules);
    return o;
}

// ---- 2 ----

/// Net stack effect of a straight-line record sequence, or nullopt when a record has none.
std::optional<std::pair<std::vector<wasm::ValType>, std::vector<wasm::ValType>>>
stack_effect(const std::vector<wasm::InstrRecord>& records, std::size_t begin, std::size_t end)
{
    std::vector<wasm::ValType> consumed;
    std::vector<wasm::ValType> stack;
    for (auto i = begin; i < end; ++i)
    {
        const auto& sig = records[i].signature;
        if (!sig)
            return std::nullopt;
        for (auto p = sig->params.rbegin(); p != sig->params.rend(); ++p)
        {
            if (stack.empty())
                consumed.insert(consumed.begin(), *p);
            else if (stack.back() != *p)
                return std::nullopt;
            else
                stack.pop_back();
        }
        stack.insert(stack.end(), sig->results.begin(), sig->results.end());
    }
    return std::make_pair(consumed, stack);
}

Outcome single_edit()
{
    Outcome o;
    std::size_t checked = 0;
    std::size_t spans = 0;
    for (const auto& file : warplens::testing::corpus_files())
    {
        const auto bytes = read_file(file);
        if (!wasm::validate_module(bytes))
            continue;
        const auto model = wasm::parse_module(bytes);
        for (const auto& m : mutate::generate_all_mutants(model).mutants)
        {
            ++checked;
            const auto where = fmt::format("{} mutant {}", file.filename().string(), m.ordinal);
            const auto mutant = wasm::parse_module(m.bytes);
            o.require(mutant.functions.size() == model.functions.size(), where + ": function count changed");
            if (!o.pass)
                return o;
            for (std::size_t f = 0; f < model.functions.size(); ++f)
                if (model.functions[f].index != m.site.function)
                    o.require(model.functions[f].instructions == mutant.functions[f].instructions,
                              where + ": another function changed");
            const auto& a = model.find_function(m.site.function)->instructions;
            const auto& b = mutant.find_function(m.site.function)->instructions;
            std::size_t prefix = 0;
            while (prefix < a.size() && prefix < b.size() && a[prefix].instr == b[prefix].instr)
                ++prefix;
            std::size_t suffix = 0;
            while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
                   a[a.size() - 1 - suffix].instr == b[b.size() - 1 - suffix].instr)
                ++suffix;
            const auto a_len = a.size() - prefix - suffix;
            const auto b_len = b.size() - prefix - suffix;
            const bool simple = m.site.rule == mutate::Rule::OperatorSubst ||
                                (m.site.rule == mutate::Rule::OperandSubst && m.site.span == 1);
            if (simple)
            {
                o.require(a.size() == b.size() && a_len == 1 && b_len == 1 && prefix == m.site.offset,
                          where + ": edit distance is not 1");
                continue;
            }
            // One contiguous span; a shared edge instruction may shrink the observed window.
            ++spans;
            o.require(prefix >= m.site.offset && prefix + a_len <= m.site.offset + m.site.span && a_len + b_len > 0,
                      where + ": edit outside the declared span");
            const auto b_end = m.site.offset + m.site.span + b.size() - a.size();
            const auto ea = stack_effect(a, m.site.offset, m.site.offset + m.site.span);
            const auto eb = stack_effect(b, m.site.offset, b_end);
            o.require(ea && eb && *ea == *eb, where + ": stack effect changed");
        }
    }
    if (o.pass)
        o.detail = fmt::format("{} mutants checked, {} of them as spans", checked, spans);
    return o;
}

// ---- 3 ----

Outcome score_exactness()
{
    Outcome o;
    using namespace select;
    o.require(std::abs(perf_diff_score(2.0) - (1 - std::exp(-1.0))) < 1e-9, "perf(2)");
    o.require(std::abs(func_sim_score(1.01) - std::exp(-0.01)) < 1e-9, "func(1.01)");
    o.require(perf_diff_score(1.0) == 0.0 && func_sim_score(1.0) == 1.0, "scores at ratio 1");
    const ScoreWeights w;
    const auto total = [&](double pr, double fr) {
        return w.alpha * perf_diff_score(pr) + w.beta * func_sim_score(fr);
    };
    // Reference values from a 40-digit evaluation.
    o.require(std::abs(total(2.00, 1.00) - 0.816060279414278839) < 1e-12, "total for 2.00/1.00");
    o.require(std::abs(total(7.77, 1.01) - 0.994451069549133313) < 1e-12, "total for 7.77/1.01");
    o.require(std::abs(total(2.00, 1.00) - 0.816060) < 1e-6 && std::abs(total(7.77, 1.01) - 0.994452) < 1e-6,
              "totals at six digits");

    std::mt19937_64 rng{20260101};
    std::uniform_real_distribution<double> exponent{-3.0, 3.0};
    std::vector<double> rs(10'000);
    for (auto& r : rs)
        r = std::pow(10.0, exponent(rng));
    std::sort(rs.begin(), rs.end());
    for (std::size_t i = 0; i < rs.size(); ++i)
    {
        const double p = perf_diff_score(rs[i]);
        const double f = func_sim_score(rs[i]);
        o.require(p >= 0 && p < 1, fmt::format("perf out of [0,1) at {}", rs[i]));
        o.require(f > 0 && f <= 1, fmt::format("func out of (0,1] at {}", rs[i]));
        if (i == 0 || !(rs[i] > rs[i - 1]))
            continue;
        const double lo = rs[i - 1];
        const double hi = rs[i];
        const double pl = perf_diff_score(lo);
        const double fl = func_sim_score(lo);
        if (hi < 1)
        {
            o.require(p <= pl && f >= fl, fmt::format("monotonicity below 1 at {}", hi));
            if (hi - lo > 1e-12)
                o.require(p < pl && f > fl, fmt::format("strict monotonicity below 1 at {}", hi));
        }
        else if (lo > 1)
        {
            o.require(p >= pl && f <= fl, fmt::format("monotonicity above 1 at {}", hi));
            if (hi < 20 && hi - lo > 1e-12)
                o.require(p > pl, fmt::format("strict perf increase at {}", hi));
            if (hi < 700 && hi - lo > 1e-12)
                o.require(f < fl, fmt::format("strict func decrease at {}", hi));
        }
    }
    if (o.pass)
        o.detail = fmt::format("totals {:.6f} and {:.6f}; 10000 ratios bounded and monotone", total(2.0, 1.0),
                               total(7.77, 1.01));
    return o;
}

// ---- 4 ----

std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    const auto& s = a.size() <= b.size() ? a : b;
    const auto& t = a.size() <= b.size() ? b : a;
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask)
    {
        const auto n = static_cast<std::size_t>(__builtin_popcount(mask));
        if (n <= best)
            continue;
        std::size_t j = 0;
        bool ok = true;
        for (std::size_t i = 0; i < s.size() && ok; ++i)
        {
            if (!(mask & (1u << i)))
                continue;
            while (j < t.size() && t[j] != s[i])
                ++j;
            ok = j < t.size();
            ++j;
        }
        if (ok)
            best = n;
    }
    return best;
}

Outcome lcs_equivalence()
{
    Outcome o;
    const std::vector<std::string> alphabet{"mov", "add", "sub", "lea", "cmp", "jmp"};
    std::mt19937 rng{4242};
    std::uniform_int_distribution<std::size_t> len{0, 12};
    std::uniform_int_distribution<std::size_t> pick{0, alphabet.size() - 1};
    const auto sequence = [&] {
        std::vector<std::string> s(len(rng));
        for (auto& x : s)
            x = alphabet[pick(rng)];
        return s;
    };
    for (int i = 0; i < 200; ++i)
    {
        const auto a = sequence();
        const auto b = sequence();
        const auto expected = brute_force_lcs(a, b);
        const auto script = diff::lcs_diff(a, b);
        o.require(script.lcs_length == expected && diff::lcs_length(a, b) == expected,
                  fmt::format("pair {}: lcs {} vs brute force {}", i, script.lcs_length, expected));
    }
    if (o.pass)
        o.detail = "200 random pairs match exhaustive enumeration";
    return o;
}

// ---- 5 and 8 ----

struct MockPair
{
    mock::MockRuntime buggy{"mock-div", harness::Role::Buggy,
                            mock::CostModel::parse("multiplier i64.div_* 50 expand 5\nstep_budget 1000000\n")};
    mock::MockRuntime oracle{"mock-uniform", harness::Role::Oracle, mock::CostModel::parse("step_budget 1000000\n")};
};

config::PipelineConfig division_config(const fs::path& out)
{
    config::PipelineConfig c;
    c.input = corpus_dir() / "dead_division.wasm";
    c.out = out;
    c.repetitions = 3;
    c.warmups = 1;
    c.top_k = 3;
    return c;
}

Outcome synthetic_isolation(const fs::path& scratch)
{
    Outcome o;
    const MockPair rt;
    const auto r = pipeline::run_pipeline(division_config(scratch / "e2e"), rt.buggy, rt.oracle);
    o.require(r.exit_status == pipeline::ReportProduced, "pipeline failed: " + r.message);
    if (!o.pass)
        return o;
    const report::Candidate* hit = nullptr;
    for (const auto& c : r.bundle.candidates)
        if (c.rank <= 3 && c.entry.rule == mutate::Rule::OperatorSubst && c.entry.before == "i64.div_u")
        {
            hit = &c;
            break;
        }
    o.require(hit != nullptr, "no Rule 2 division replacement in the top 3");
    if (!o.pass)
        return o;
    o.require(hit->score.func_ratio == 1.0, fmt::format("Ratio(O) = {}", hit->score.func_ratio));
    std::vector<std::string> deleted;
    for (const auto& d : hit->diffs)
        for (const auto& e : d.script.ops)
            if (e.kind == diff::EditKind::Delete)
                deleted.push_back(e.mnemonic);
    o.require(deleted == std::vector<std::string>(5, "div_expand"),
              fmt::format("identified instructions: {}", fmt::join(deleted, ",")));
    if (o.pass)
        o.detail = fmt::format("rank {} mutant {} ({} => {}), Ratio(O) 1.0, identified 5 div_expand", hit->rank,
                               hit->entry.ordinal, hit->entry.before, hit->entry.after);
    return o;
}

Outcome determinism(const fs::path& scratch)
{
    Outcome o;
    const MockPair rt;
    const auto a = pipeline::run_pipeline(division_config(scratch / "det_a"), rt.buggy, rt.oracle);
    const auto b = pipeline::run_pipeline(division_config(scratch / "det_b"), rt.buggy, rt.oracle);
    o.require(a.exit_status == 0 && b.exit_status == 0, "pipeline failed");
    const auto text = [](const fs::path& p) {
        const auto bytes = read_file(p);
        return std::string{bytes.begin(), bytes.end()};
    };
    for (const auto* f : {"scores.tsv", "report.txt", "report.html", "summary.jsonl"})
        o.require(text(scratch / "det_a" / f) == text(scratch / "det_b" / f), std::string{f} + " differs");
    o.require(a.bundle.ranked.size() == b.bundle.ranked.size(), "ranking sizes differ");
    for (std::size_t i = 0; o.pass && i < a.bundle.ranked.size(); ++i)
        o.require(a.bundle.ranked[i].ordinal == b.bundle.ranked[i].ordinal, "rankings differ");
    if (o.pass)
        o.detail = fmt::format("score table, ranking of {} and reports byte-identical", a.bundle.ranked.size());
    return o;
}

// ---- 6 ----

Outcome zero_opcode_diff()
{
    Outcome o;
    const auto cost = mock::CostModel::uniform();
    {
        const auto model = load("dead_division.wasm");
        const auto gen = mutate::generate_all_mutants(model);
        const auto it = std::find_if(gen.mutants.begin(), gen.mutants.end(), [](const auto& m) {
            return m.site.rule == mutate::Rule::OperandSubst && m.before.starts_with("i32.const") &&
                   m.after.starts_with("i32.const");
        });
        o.require(it != gen.mutants.end(), "no constant substitution mutant");
        if (!o.pass)
            return o;
        const auto diffs = diff::isolate_slow_code(mock::mock_dump(model, cost),
                                                   mock::mock_dump(wasm::parse_module(it->bytes), cost));
        bool bytes_flag = false;
        for (const auto& d : diffs)
            bytes_flag = bytes_flag || d.bytes_differ;
        o.require(diff::total_identified(diffs) == 0, "identified instructions on an opcode-identical pair");
        o.require(bytes_flag, "bytes-differ flag not set");
    }
    {
        const auto model = load("alignment.wasm");
        const auto first = model.functions.at(0).index;
        const auto second = model.functions.at(1).index;
        const auto gen = mutate::generate_all_mutants(model);
        const auto it = std::find_if(gen.mutants.begin(), gen.mutants.end(), [&](const auto& m) {
            return m.site.function == first && m.replacement.size() != m.site.span;
        });
        o.require(it != gen.mutants.end(), "no size-changing mutant of the first function");
        if (!o.pass)
            return o;
        const auto diffs = diff::isolate_slow_code(mock::mock_dump(model, cost),
                                                   mock::mock_dump(wasm::parse_module(it->bytes), cost));
        const auto d = std::find_if(diffs.begin(), diffs.end(), [&](const auto& x) { return x.function == second; });
        o.require(d != diffs.end(), "second function missing from the diff");
        if (!o.pass)
            return o;
        o.require(d->address_delta(), "address-delta flag not set");
        o.require(d->script.deletes() == 0 && d->script.inserts() == 0 && d->regions.empty(),
                  "edit script of the shifted function is not empty");
    }
    if (o.pass)
        o.detail = "bytes-differ with 0 identified; address delta with empty edit script";
    return o;
}

// ---- 7 ----

Outcome reduction_checks(const fs::path& scratch)
{
    Outcome o;
    const mock::MockRuntime buggy{"mock-div", harness::Role::Buggy, mock::CostModel::parse("multiplier i64.div_* 50\n")};
    const mock::MockRuntime oracle{"mock-uniform", harness::Role::Oracle, mock::CostModel::uniform()};
    const harness::MeasureOptions opt{3, 0, 0.10, std::chrono::duration<double>{30.0}};
    const auto original = corpus_dir() / "dead_division.wasm";

    const auto identity = reduce::validate_reduction(original, original, buggy, oracle, opt);
    o.require(identity.pass() && identity.buggy_ratio == 1.0 && identity.gap_ratio == 1.0,
              "identity reduction:\n" + reduce::describe(identity));

    warplens::testing::ModuleSpec s;
    s.results = {wasm::ValType::i32};
    s.body = {wasm::make_i32_const(1000)};
    const auto reduced = scratch / "loop_deleted.wasm";
    warplens::testing::write_file(reduced, wasm::encode_module(warplens::testing::build_module(s)));
    const auto deleted = reduce::validate_reduction(original, reduced, buggy, oracle, opt);
    o.require(deleted.original.buggy >= 100 * deleted.reduced.buggy, "reduced module is not 100x faster");
    o.require(!deleted.buggy_ok && !deleted.pass(), "loop-deleted reduction passed check 1");
    if (o.pass)
        o.detail = fmt::format("identity ratios 1.0/1.0; loop-deleted buggy ratio {:.2g} rejected", deleted.buggy_ratio);
    return o;
}
}  // namespace

int main()
{
    warplens::testing::ScratchDir scratch{"acceptance"};
    struct Criterion
    {
        int id;
        const char* name;
        double limit_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "mutant validity", 30, mutant_validity},
        {2, "single-edit property", 60, single_edit},
        {3, "score formula exactness", 5, score_exactness},
        {4, "LCS oracle equivalence", 60, lcs_equivalence},
        {5, "end-to-end synthetic isolation", 120, [&] { return synthetic_isolation(scratch.path()); }},
        {6, "zero-opcode-diff detection", 30, zero_opcode_diff},
        {7, "reduction validation", 30, [&] { return reduction_checks(scratch.path()); }},
        {8, "determinism", 240, [&] { return determinism(scratch.path()); }},
    };
    int failures = 0;
    for (const auto& c : criteria)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string{"exception: "} + e.what()};
        }
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        if (o.pass && took.count() > c.limit_seconds)
            o = {false, fmt::format("took {:.1f}s, limit {:.0f}s", took.count(), c.limit_seconds)};
        failures += o.pass ? 0 : 1;
        fmt::print("{} criterion {}: {} ({:.2f}s) - {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, took.count(),
                   o.detail);
    }
    return failures == 0 ? 0 : 1;
}
