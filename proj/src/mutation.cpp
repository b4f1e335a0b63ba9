// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/mutation.hpp"
#include "warplens/validator.hpp"
#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

namespace warplens::mutate
{
using namespace wasm;

namespace
{
std::uint64_t negate_bits(ValType t, std::uint64_t bits)
{
    switch (t)
    {
    case ValType::i32:
        return static_cast<std::uint32_t>(0u - static_cast<std::uint32_t>(bits));
    case ValType::i64:
        return 0ull - bits;
    case ValType::f32:
        return (bits ^ 0x80000000u) & 0xffffffffu;
    case ValType::f64:
        return bits ^ 0x8000000000000000ull;
    default:
        return bits;
    }
}

bool is_zero_bits(ValType t, std::uint64_t bits)
{
    switch (t)
    {
    case ValType::i32:
        return (bits & 0xffffffffu) == 0;
    case ValType::f32:
        return (bits & 0x7fffffffu) == 0;
    case ValType::f64:
        return (bits & 0x7fffffffffffffffull) == 0;
    default:
        return bits == 0;
    }
}

std::uint64_t const_bits(const Instr& in, ValType t)
{
    return (t == ValType::i32 || t == ValType::f32) ? (in.imm & 0xffffffffu) : in.imm;
}

std::string span_text(const std::vector<InstrRecord>& body, std::size_t offset, std::size_t span)
{
    std::string s;
    for (std::size_t i = offset; i < offset + span; ++i)
    {
        if (!s.empty())
            s += "; ";
        s += instr_text(body[i].instr);
    }
    return s;
}

std::string replacement_text(const std::vector<Instr>& repl)
{
    std::string s;
    for (const auto& in : repl)
    {
        if (!s.empty())
            s += "; ";
        s += instr_text(in);
    }
    return s;
}

const FunctionBody& body_of(const Module& model, const MutationSite& site)
{
    const auto* body = model.find_function(site.function);
    if (body == nullptr || !body->is_mutable || site.offset + site.span > body->instructions.size() ||
        site.span == 0)
        throw Error{Errc::IllegalSpan, "site outside function " + std::to_string(site.function)};
    return *body;
}

Mutant make_mutant(const Module& model, const MutationSite& site, std::vector<Instr> repl)
{
    const auto& body = body_of(model, site);
    Mutant m;
    m.site = site;
    m.before = span_text(body.instructions, site.offset, site.span);
    m.after = replacement_text(repl);
    m.bytes = encode_module(apply_edit(model, site, repl));
    m.replacement = std::move(repl);
    return m;
}

/// Start of the operand unit ending at `end` (exclusive), or nullopt when the
/// record there is not operand-producing. A fused load pair counts as one unit.
std::optional<std::size_t> operand_unit_start(const std::vector<InstrRecord>& body, std::size_t end)
{
    if (end == 0)
        return std::nullopt;
    const auto& rec = body[end - 1];
    if (rec.category != InstrCategory::Operand)
        return std::nullopt;
    return rec.fused ? end - 2 : end - 1;
}

std::optional<std::size_t> deletion_start(const FunctionBody& body, std::size_t op_index)
{
    const auto& rec = body.instructions[op_index];
    if (rec.category != InstrCategory::Operator || !rec.signature)
        return std::nullopt;
    if (op_info(rec.instr.op)->cls == OpClass::LocalTee)
        return std::nullopt;
    std::size_t start = op_index;
    for (std::size_t k = 0; k < rec.signature->params.size(); ++k)
    {
        const auto s = operand_unit_start(body.instructions, start);
        if (!s)
            return std::nullopt;
        start = *s;
    }
    return start;
}

std::uint64_t max_positive(ValType t)
{
    return t == ValType::i32 ? 0x7fffffffull : 0x7fffffffffffffffull;
}
}  // namespace

std::string_view rule_name(Rule r) noexcept
{
    switch (r)
    {
    case Rule::OperandSubst:
        return "rule1";
    case Rule::OperatorSubst:
        return "rule2";
    case Rule::OperatorDelete:
        return "rule3";
    }
    return "rule?";
}

Rule rule_from_name(std::string_view s)
{
    if (s == "rule1")
        return Rule::OperandSubst;
    if (s == "rule2")
        return Rule::OperatorSubst;
    if (s == "rule3")
        return Rule::OperatorDelete;
    throw Error{Errc::ConfigError, "unknown rule '" + std::string{s} + "'"};
}

ImmediatePool ImmediatePool::defaults()
{
    ImmediatePool p;
    p.i32 = {0, 1, 0xffffffffull, max_positive(ValType::i32)};
    p.i64 = {0, 1, ~0ull, max_positive(ValType::i64)};
    p.f32 = {std::bit_cast<std::uint32_t>(0.0f), std::bit_cast<std::uint32_t>(1.0f),
             std::bit_cast<std::uint32_t>(-1.0f)};
    p.f64 = {std::bit_cast<std::uint64_t>(0.0), std::bit_cast<std::uint64_t>(1.0),
             std::bit_cast<std::uint64_t>(-1.0)};
    return p;
}

const std::vector<std::uint64_t>& ImmediatePool::for_type(ValType t) const
{
    switch (t)
    {
    case ValType::i32:
        return i32;
    case ValType::i64:
        return i64;
    case ValType::f32:
        return f32;
    case ValType::f64:
        return f64;
    default:
        throw Error{Errc::UnsupportedFeature, "no immediate pool for non-numeric type"};
    }
}

std::vector<std::uint64_t>& ImmediatePool::for_type(ValType t)
{
    return const_cast<std::vector<std::uint64_t>&>(std::as_const(*this).for_type(t));
}

std::vector<std::uint64_t> parse_pool(ValType t, std::string_view text)
{
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos)
            comma = text.size();
        auto item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        pos = comma + 1;
        if (item.empty())
            continue;
        const auto* first = item.data();
        const auto* last = item.data() + item.size();
        std::errc ec{};
        const char* ptr = nullptr;
        if (t == ValType::i32 || t == ValType::i64)
        {
            std::int64_t v = 0;
            const auto r = std::from_chars(first, last, v);
            ptr = r.ptr;
            ec = r.ec;
            if (t == ValType::i32 && ec == std::errc{} &&
                (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::uint32_t>::max()))
                ec = std::errc::result_out_of_range;
            out.push_back(t == ValType::i32 ? static_cast<std::uint32_t>(v) : static_cast<std::uint64_t>(v));
        }
        else
        {
            double v = 0;
            const auto r = std::from_chars(first, last, v);
            ptr = r.ptr;
            ec = r.ec;
            out.push_back(t == ValType::f32 ? std::bit_cast<std::uint32_t>(static_cast<float>(v))
                                            : std::bit_cast<std::uint64_t>(v));
        }
        if (ec != std::errc{} || ptr != last)
            throw Error{Errc::ConfigError, "bad " + std::string{valtype_name(t)} + " pool literal '" +
                                               std::string{item} + "'"};
    }
    return out;
}

std::vector<MutationSite> enumerate_mutation_sites(const Module& model)
{
    std::vector<MutationSite> sites;
    for (const auto& body : model.functions)
    {
        if (!body.is_mutable)
            continue;
        for (std::size_t i = 0; i < body.instructions.size(); ++i)
        {
            const auto& rec = body.instructions[i];
            if (rec.category == InstrCategory::Operand)
            {
                if (rec.fused)
                    sites.push_back({body.index, i - 1, 2, Rule::OperandSubst});
                else
                    sites.push_back({body.index, i, 1, Rule::OperandSubst});
            }
            else if (rec.category == InstrCategory::Operator)
            {
                if (op_info(rec.instr.op)->cls == OpClass::Numeric)
                    sites.push_back({body.index, i, 1, Rule::OperatorSubst});
                if (const auto start = deletion_start(body, i))
                    sites.push_back({body.index, *start, i + 1 - *start, Rule::OperatorDelete});
            }
        }
    }
    return sites;
}

std::vector<Mutant> apply_rule1(const Module& model, const MutationSite& site, const ImmediatePool& pool)
{
    const auto& body = body_of(model, site);
    const auto& first = body.instructions[site.offset];
    const auto& last = body.instructions[site.offset + site.span - 1];
    const bool fused = site.span == 2 && last.fused;
    if (site.rule != Rule::OperandSubst || last.category != InstrCategory::Operand ||
        (site.span != 1 && !fused))
        throw Error{Errc::IllegalSpan, "rule 1 site is not an operand"};

    const ValType t = last.signature->results.front();
    std::vector<std::vector<Instr>> repls;
    const auto cls = op_info(first.instr.op)->cls;

    if (!fused && cls == OpClass::Const)
    {
        const auto orig = const_bits(first.instr, t);
        std::vector<std::uint64_t> cands = pool.for_type(t);
        if (pool.negate_original && !is_zero_bits(t, orig))
            cands.push_back(negate_bits(t, orig));
        std::set<std::uint64_t> seen{orig};
        for (const auto bits : cands)
            if (seen.insert(bits).second)
                repls.push_back({make_const(t, bits)});
        for (std::uint32_t k = 0; k < body.locals.size(); ++k)
            if (body.locals[k] == t)
                repls.push_back({make_indexed(op::local_get, k)});
        for (std::uint32_t k = 0; k < model.global_count(); ++k)
            if (model.global_type(k).type == t)
                repls.push_back({make_indexed(op::global_get, k)});
    }
    else
    {
        std::set<std::uint64_t> seen;
        for (const auto bits : pool.for_type(t))
            if (seen.insert(bits).second)
                repls.push_back({make_const(t, bits)});
    }

    std::vector<Mutant> out;
    out.reserve(repls.size());
    for (auto& r : repls)
        out.push_back(make_mutant(model, site, std::move(r)));
    return out;
}

std::vector<Mutant> apply_rule2(const Module& model, const MutationSite& site)
{
    const auto& body = body_of(model, site);
    const auto& rec = body.instructions[site.offset];
    if (site.rule != Rule::OperatorSubst || site.span != 1 || rec.category != InstrCategory::Operator ||
        op_info(rec.instr.op)->cls != OpClass::Numeric)
        throw Error{Errc::IllegalSpan, "rule 2 site is not a numeric operator"};
    std::vector<Mutant> out;
    for (const auto code : substitution_group(*rec.signature))
        if (code != rec.instr.op)
            out.push_back(make_mutant(model, site, {make_simple(code)}));
    return out;
}

Mutant apply_rule3(const Module& model, const MutationSite& site)
{
    const auto& body = body_of(model, site);
    const std::size_t op_index = site.offset + site.span - 1;
    const auto start = deletion_start(body, op_index);
    if (site.rule != Rule::OperatorDelete || !start || *start != site.offset)
        throw Error{Errc::IllegalSpan, "operator at offset " + std::to_string(op_index) +
                                           " has an operand that is not operand-produced"};
    std::vector<Instr> repl;
    for (const auto t : body.instructions[op_index].signature->results)
        repl.push_back(make_const(t, 0));
    return make_mutant(model, site, std::move(repl));
}

Module apply_edit(const Module& model, const MutationSite& site, const std::vector<Instr>& replacement)
{
    Module out = model;
    auto* body = out.find_function(site.function);
    if (body == nullptr || site.offset + site.span > body->instructions.size())
        throw Error{Errc::IllegalSpan, "edit outside function body"};
    auto& ins = body->instructions;
    const auto at = ins.erase(ins.begin() + static_cast<std::ptrdiff_t>(site.offset),
                              ins.begin() + static_cast<std::ptrdiff_t>(site.offset + site.span));
    std::vector<InstrRecord> fresh;
    for (const auto& in : replacement)
    {
        InstrRecord rec;
        rec.instr = in;
        fresh.push_back(std::move(rec));
    }
    ins.insert(at, fresh.begin(), fresh.end());
    classify_function(out, *body);
    return out;
}

GenerationResult generate_all_mutants(const Module& model, const MutationConfig& config)
{
    GenerationResult result;
    std::set<Bytes> seen{encode_module(model)};
    const auto admit = [&](Mutant&& m) {
        ++result.stats.candidates;
        if (!seen.insert(m.bytes).second)
        {
            ++result.stats.duplicates;
            return;
        }
        if (!wasm::validate_module(m.bytes))
        {
            ++result.stats.invalid;
            return;
        }
        if (result.mutants.size() >= config.cap)
        {
            ++result.stats.truncated;
            return;
        }
        m.ordinal = result.mutants.size() + 1;
        result.mutants.push_back(std::move(m));
    };

    for (const auto& site : enumerate_mutation_sites(model))
    {
        switch (site.rule)
        {
        case Rule::OperandSubst:
            for (auto& m : apply_rule1(model, site, config.pool))
                admit(std::move(m));
            break;
        case Rule::OperatorSubst:
            for (auto& m : apply_rule2(model, site))
                admit(std::move(m));
            break;
        case Rule::OperatorDelete:
            admit(apply_rule3(model, site));
            break;
        }
    }
    return result;
}

std::filesystem::path mutant_filename(const Mutant& m)
{
    return "mutant_" + std::to_string(m.ordinal) + "_" + std::string{rule_name(m.site.rule)} + ".wasm";
}

std::string manifest_line(const Mutant& m)
{
    nlohmann::ordered_json j;
    j["ordinal"] = m.ordinal;
    j["rule"] = rule_name(m.site.rule);
    j["function"] = m.site.function;
    j["offset"] = m.site.offset;
    j["span"] = m.site.span;
    j["before"] = m.before;
    j["after"] = m.after;
    j["file"] = mutant_filename(m).string();
    return j.dump();
}

void persist_mutants(const std::filesystem::path& dir, const std::vector<Mutant>& mutants)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream manifest{dir / "manifest.jsonl", std::ios::binary};
    if (!manifest)
        throw Error{Errc::OutputUnwritable, (dir / "manifest.jsonl").string()};
    for (const auto& m : mutants)
    {
        std::ofstream f{dir / mutant_filename(m), std::ios::binary};
        f.write(reinterpret_cast<const char*>(m.bytes.data()), static_cast<std::streamsize>(m.bytes.size()));
        if (!f)
            throw Error{Errc::OutputUnwritable, (dir / mutant_filename(m)).string()};
        manifest << manifest_line(m) << '\n';
    }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file)
{
    std::ifstream in{file};
    if (!in)
        throw Error{Errc::ConfigError, "cannot read manifest " + file.string()};
    std::vector<ManifestEntry> out;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        ManifestEntry e;
        e.ordinal = j.at("ordinal").get<std::size_t>();
        e.rule = rule_from_name(j.at("rule").get<std::string>());
        e.function = j.at("function").get<std::uint32_t>();
        e.offset = j.at("offset").get<std::size_t>();
        e.span = j.at("span").get<std::size_t>();
        e.before = j.at("before").get<std::string>();
        e.after = j.at("after").get<std::string>();
        e.file = j.at("file").get<std::string>();
        out.push_back(std::move(e));
    }
    return out;
}
}  // namespace warplens::mutate
