// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/machine_diff.hpp"
#include "warplens/error.hpp"
#include <algorithm>
#include <fmt/format.h>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>

namespace warplens::diff
{
namespace
{
using Sym = std::uint32_t;

struct Interned
{
    std::vector<Sym> a;
    std::vector<Sym> b;
};

Interned intern(std::span<const std::string> a, std::span<const std::string> b)
{
    std::unordered_map<std::string_view, Sym> ids;
    Interned out;
    const auto id = [&](const std::string& s) { return ids.emplace(s, static_cast<Sym>(ids.size())).first->second; };
    for (const auto& s : a)
        out.a.push_back(id(s));
    for (const auto& s : b)
        out.b.push_back(id(s));
    return out;
}

/// row[k] = LCS(a, b[0..k)).
template <typename A, typename B>
std::vector<std::uint32_t> lcs_row(std::size_t n, A&& at_a, std::size_t m, B&& at_b)
{
    std::vector<std::uint32_t> prev(m + 1, 0);
    std::vector<std::uint32_t> cur(m + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
        const Sym x = at_a(i);
        for (std::size_t j = 0; j < m; ++j)
            cur[j + 1] = x == at_b(j) ? prev[j] + 1 : std::max(prev[j + 1], cur[j]);
        std::swap(prev, cur);
    }
    return prev;
}

class Solver
{
public:
    Solver(const Interned& in, const LcsOptions& opt, std::vector<Edit>& out) : a_{in.a}, b_{in.b}, opt_{opt}, out_{out} {}

    void solve(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1)
    {
        const auto n = a1 - a0;
        const auto m = b1 - b0;
        if (n == 0)
        {
            for (auto j = b0; j < b1; ++j)
                emit(EditKind::Insert, npos, j);
            return;
        }
        if (m == 0)
        {
            for (auto i = a0; i < a1; ++i)
                emit(EditKind::Delete, i, npos);
            return;
        }
        if (n == 1 || (n + 1) * (m + 1) <= opt_.table_cells)
        {
            table(a0, a1, b0, b1);
            return;
        }
        const auto mid = a0 + n / 2;
        const auto fwd = lcs_row(
            mid - a0, [&](std::size_t i) { return a_[a0 + i]; }, m, [&](std::size_t j) { return b_[b0 + j]; });
        const auto bwd = lcs_row(
            a1 - mid, [&](std::size_t i) { return a_[a1 - 1 - i]; }, m, [&](std::size_t j) { return b_[b1 - 1 - j]; });
        std::size_t best = 0;
        std::uint32_t best_len = 0;
        for (std::size_t k = 0; k <= m; ++k)
            if (const auto len = fwd[k] + bwd[m - k]; len > best_len)
            {
                best_len = len;
                best = k;
            }
        solve(a0, mid, b0, b0 + best);
        solve(mid, a1, b0 + best, b1);
    }

private:
    void emit(EditKind k, std::size_t i, std::size_t j) { out_.push_back({k, {}, i, j}); }

    void table(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1)
    {
        const auto n = a1 - a0;
        const auto m = b1 - b0;
        const auto w = m + 1;
        // Suffix lengths: L[i][j] = LCS(a[i..], b[j..]).
        std::vector<std::uint32_t> L((n + 1) * w, 0);
        for (std::size_t i = n; i-- > 0;)
            for (std::size_t j = m; j-- > 0;)
                L[i * w + j] = a_[a0 + i] == b_[b0 + j] ? L[(i + 1) * w + j + 1] + 1
                                                         : std::max(L[(i + 1) * w + j], L[i * w + j + 1]);
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < n && j < m)
        {
            if (a_[a0 + i] == b_[b0 + j] && L[i * w + j] == L[(i + 1) * w + j + 1] + 1)
            {
                emit(EditKind::Keep, a0 + i, b0 + j);
                ++i;
                ++j;
            }
            else if (L[(i + 1) * w + j] >= L[i * w + j + 1])
                emit(EditKind::Delete, a0 + i++, npos);
            else
                emit(EditKind::Insert, npos, b0 + j++);
        }
        for (; i < n; ++i)
            emit(EditKind::Delete, a0 + i, npos);
        for (; j < m; ++j)
            emit(EditKind::Insert, npos, b0 + j);
    }

    const std::vector<Sym>& a_;
    const std::vector<Sym>& b_;
    const LcsOptions& opt_;
    std::vector<Edit>& out_;
};

const char* presence_name(Presence p)
{
    switch (p)
    {
    case Presence::OriginalOnly:
        return "original-only";
    case Presence::MutantOnly:
        return "mutant-only";
    default:
        return "both";
    }
}
}  // namespace

std::vector<OpcodeSequence> normalize_disassembly(const dis::Disassembly& d)
{
    std::vector<OpcodeSequence> out;
    for (const auto& f : d.functions)
    {
        OpcodeSequence s;
        s.function = f.index;
        for (const auto& i : f.instructions)
        {
            s.mnemonics.push_back(i.mnemonic);
            s.addresses.push_back(i.address);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::size_t EditScript::deletes() const noexcept
{
    return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [](const Edit& e) { return e.kind == EditKind::Delete; }));
}

std::size_t EditScript::inserts() const noexcept
{
    return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [](const Edit& e) { return e.kind == EditKind::Insert; }));
}

EditScript lcs_diff(std::span<const std::string> a, std::span<const std::string> b, const LcsOptions& opt)
{
    const auto in = intern(a, b);
    EditScript s;
    std::size_t pre = 0;
    while (pre < a.size() && pre < b.size() && in.a[pre] == in.b[pre])
        ++pre;
    std::size_t suf = 0;
    while (suf < a.size() - pre && suf < b.size() - pre && in.a[a.size() - 1 - suf] == in.b[b.size() - 1 - suf])
        ++suf;
    for (std::size_t i = 0; i < pre; ++i)
        s.ops.push_back({EditKind::Keep, {}, i, i});
    Solver{in, opt, s.ops}.solve(pre, a.size() - suf, pre, b.size() - suf);
    for (std::size_t k = suf; k-- > 0;)
        s.ops.push_back({EditKind::Keep, {}, a.size() - 1 - k, b.size() - 1 - k});
    for (auto& e : s.ops)
    {
        e.mnemonic = e.a != npos ? a[e.a] : b[e.b];
        if (e.kind == EditKind::Keep)
            ++s.lcs_length;
    }
    return s;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b)
{
    const auto in = intern(a, b);
    return lcs_row(
        in.a.size(), [&](std::size_t i) { return in.a[i]; }, in.b.size(), [&](std::size_t j) { return in.b[j]; })
        .back();
}

std::vector<Region> find_regions(const EditScript& s, std::size_t context)
{
    std::vector<Region> out;
    const auto n = s.ops.size();
    for (std::size_t i = 0; i < n;)
    {
        if (s.ops[i].kind == EditKind::Keep)
        {
            ++i;
            continue;
        }
        Region r;
        r.begin = i;
        while (i < n && s.ops[i].kind != EditKind::Keep)
            ++i;
        r.end = i;
        r.context_begin = r.begin >= context ? r.begin - context : 0;
        r.context_end = std::min(n, r.end + context);
        out.push_back(r);
    }
    return out;
}

std::vector<FunctionDiff> isolate_slow_code(const dis::Disassembly& original, const dis::Disassembly& mutant,
                                            const LcsOptions& opt)
{
    std::set<std::uint32_t> indices;
    std::size_t common = 0;
    for (const auto& f : original.functions)
    {
        indices.insert(f.index);
        common += mutant.find(f.index) != nullptr;
    }
    for (const auto& f : mutant.functions)
        indices.insert(f.index);
    if (common == 0 && !original.functions.empty() && !mutant.functions.empty())
        throw Error{Errc::UnpairableFunctions, "original and mutant dumps share no function index"};

    std::vector<FunctionDiff> out;
    for (const auto idx : indices)
    {
        const auto* fa = original.find(idx);
        const auto* fb = mutant.find(idx);
        FunctionDiff d;
        d.function = idx;
        d.presence = fa && fb ? Presence::Both : fa ? Presence::OriginalOnly : Presence::MutantOnly;
        std::vector<std::string> ma;
        std::vector<std::string> mb;
        if (fa)
        {
            d.symbol = fa->symbol;
            d.original_count = fa->instructions.size();
            d.original_start = fa->start;
            for (const auto& i : fa->instructions)
            {
                ma.push_back(i.mnemonic);
                d.original_addresses.push_back(i.address);
            }
        }
        if (fb)
        {
            if (d.symbol.empty())
                d.symbol = fb->symbol;
            d.mutant_count = fb->instructions.size();
            d.mutant_start = fb->start;
            for (const auto& i : fb->instructions)
            {
                mb.push_back(i.mnemonic);
                d.mutant_addresses.push_back(i.address);
            }
        }
        d.script = lcs_diff(ma, mb, opt);
        d.regions = find_regions(d.script);
        if (fa && fb)
            for (const auto& e : d.script.ops)
                if (e.kind == EditKind::Keep && fa->instructions[e.a].bytes != fb->instructions[e.b].bytes)
                {
                    d.bytes_differ = true;
                    break;
                }
        out.push_back(std::move(d));
    }
    return out;
}

std::size_t total_identified(const std::vector<FunctionDiff>& diffs)
{
    std::size_t n = 0;
    for (const auto& d : diffs)
        n += d.identified();
    return n;
}

std::string summary_jsonl(const std::vector<FunctionDiff>& diffs)
{
    std::string out;
    for (const auto& d : diffs)
    {
        nlohmann::ordered_json j;
        j["func"] = d.function;
        j["symbol"] = d.symbol;
        j["presence"] = presence_name(d.presence);
        j["original_count"] = d.original_count;
        j["mutant_count"] = d.mutant_count;
        j["original_start"] = fmt::format("0x{:x}", d.original_start);
        j["mutant_start"] = fmt::format("0x{:x}", d.mutant_start);
        j["lcs"] = d.script.lcs_length;
        j["deletes"] = d.script.deletes();
        j["inserts"] = d.script.inserts();
        j["identified"] = d.identified();
        j["regions"] = d.regions.size();
        j["bytes_differ"] = d.bytes_differ;
        j["address_delta"] = d.address_delta();
        out += j.dump() + '\n';
    }
    return out;
}
}  // namespace warplens::diff
