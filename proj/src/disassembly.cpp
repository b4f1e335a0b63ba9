// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/disassembly.hpp"
#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>

namespace warplens::dis
{
namespace
{
[[noreturn]] void parse_error(std::size_t line, const std::string& what)
{
    throw Error{Errc::DumpParseError, "line " + std::to_string(line) + ": " + what};
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool is_hex(char c)
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

std::optional<std::uint64_t> parse_hex(std::string_view s)
{
    if (s.starts_with("0x") || s.starts_with("0X"))
        s.remove_prefix(2);
    if (s.empty() || s.size() > 16)
        return std::nullopt;
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc{} || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

bool is_byte_token(std::string_view t)
{
    return t.size() == 2 && is_hex(t[0]) && is_hex(t[1]);
}

std::vector<std::string_view> words(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size())
    {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        const auto b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t')
            ++i;
        if (i > b)
            out.push_back(s.substr(b, i - b));
    }
    return out;
}

const std::set<std::string_view>& prefixes()
{
    static const std::set<std::string_view> p{"lock",   "rep",     "repe",   "repz",     "repne",    "repnz",
                                              "data16", "data32",  "addr32", "notrack",  "bnd",      "xacquire",
                                              "xrelease", "rex",   "rex.W",  "cs",       "ds",       "ss",
                                              "es",     "fs",      "gs"};
    return p;
}

void split_instruction(std::string_view text, MachineInstr& out)
{
    text = trim(text);
    std::string mnemonic;
    while (!text.empty())
    {
        std::size_t end = 0;
        while (end < text.size() && text[end] != ' ' && text[end] != '\t')
            ++end;
        const auto tok = text.substr(0, end);
        if (!mnemonic.empty())
            mnemonic += ' ';
        mnemonic += tok;
        text = trim(text.substr(end));
        if (!prefixes().contains(tok))
            break;
    }
    out.mnemonic = std::move(mnemonic);
    out.operands = std::string{text};
}

struct InstrLine
{
    std::uint64_t address = 0;
    Bytes bytes;
    std::string text;  ///< empty for a continuation line carrying only bytes
};

std::optional<InstrLine> parse_instr_line(std::string_view line)
{
    auto s = trim(line);
    std::size_t i = 0;
    while (i < s.size() && is_hex(s[i]))
        ++i;
    if (i == 0 || i >= s.size() || s[i] != ':')
        return std::nullopt;
    InstrLine out;
    out.address = *parse_hex(s.substr(0, i));
    auto rest = s.substr(i + 1);

    std::string_view byte_field;
    std::string_view text_field;
    const auto first_tab = rest.find('\t');
    if (first_tab != std::string_view::npos && !trim(rest.substr(0, first_tab)).empty())
    {
        byte_field = rest.substr(0, first_tab);
        text_field = rest.substr(first_tab + 1);
    }
    else if (first_tab != std::string_view::npos)
    {
        // objdump style: "addr:\tbytes\tinstruction"
        rest = rest.substr(first_tab + 1);
        const auto tab = rest.find('\t');
        byte_field = rest.substr(0, tab);
        text_field = tab == std::string_view::npos ? std::string_view{} : rest.substr(tab + 1);
    }
    else
    {
        // Space separated: leading two-hex-digit tokens are bytes.
        const auto ws = words(rest);
        std::size_t k = 0;
        while (k < ws.size() && is_byte_token(ws[k]))
            ++k;
        if (k == 0)
            return std::nullopt;
        byte_field = rest.substr(0, static_cast<std::size_t>(ws[k - 1].data() + 2 - rest.data()));
        text_field = k < ws.size() ? rest.substr(static_cast<std::size_t>(ws[k].data() - rest.data())) : "";
    }
    for (const auto w : words(byte_field))
    {
        if (!is_byte_token(w))
            return std::nullopt;
        out.bytes.push_back(static_cast<std::uint8_t>(*parse_hex(w)));
    }
    if (out.bytes.empty())
        return std::nullopt;
    out.text = std::string{trim(text_field)};
    return out;
}

struct Header
{
    std::string symbol;
    std::uint64_t start = 0;
};

std::optional<Header> parse_header(std::string_view line)
{
    auto s = trim(line);
    if (s.size() < 2 || s.back() != ':')
        return std::nullopt;
    s.remove_suffix(1);
    // Optional leading address: "0000000000000000 <sym>".
    Header h;
    const auto ws = words(s);
    if (ws.size() == 2 && parse_hex(ws[0]))
    {
        h.start = *parse_hex(ws[0]);
        s = ws[1];
    }
    else if (ws.size() != 1)
        return std::nullopt;
    if (s.starts_with('<') && s.ends_with('>'))
        s = s.substr(1, s.size() - 2);
    if (s.empty())
        return std::nullopt;
    h.symbol = std::string{s};
    return h;
}

Disassembly finish(std::vector<DisassembledFunction> fns)
{
    std::set<std::uint32_t> seen;
    for (auto& f : fns)
    {
        if (!seen.insert(f.index).second)
            throw Error{Errc::DumpParseError, "duplicate function index " + std::to_string(f.index)};
        for (std::size_t i = 1; i < f.instructions.size(); ++i)
            if (f.instructions[i].address <= f.instructions[i - 1].address)
                throw Error{Errc::DumpParseError,
                            "addresses not increasing in function " + std::to_string(f.index)};
        if (!f.instructions.empty())
            f.start = f.instructions.front().address;
    }
    std::sort(fns.begin(), fns.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    return Disassembly{std::move(fns)};
}

Disassembly parse_normalized(std::string_view text)
{
    std::vector<DisassembledFunction> fns;
    std::map<std::uint32_t, std::size_t> by_index;
    std::size_t lineno = 0;
    std::istringstream in{std::string{text}};
    std::string line;
    while (std::getline(in, line))
    {
        ++lineno;
        if (trim(line).empty())
            continue;
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(line);
            const auto func = j.at("func").get<std::uint32_t>();
            auto it = by_index.find(func);
            if (it == by_index.end())
            {
                it = by_index.emplace(func, fns.size()).first;
                fns.push_back({func, "func" + std::to_string(func), 0, {}});
            }
            auto& f = fns[it->second];
            if (j.contains("symbol"))
            {
                f.symbol = j.at("symbol").get<std::string>();
                const auto start = parse_hex(j.at("start").get<std::string>());
                if (!start)
                    parse_error(lineno, "bad start address");
                f.start = *start;
                continue;
            }
            MachineInstr mi;
            const auto addr = parse_hex(j.at("addr").get<std::string>());
            if (!addr)
                parse_error(lineno, "bad address");
            mi.address = *addr;
            const auto hex = j.at("bytes").get<std::string>();
            if (hex.size() % 2 != 0)
                parse_error(lineno, "odd byte string");
            for (std::size_t i = 0; i < hex.size(); i += 2)
            {
                const auto b = parse_hex(std::string_view{hex}.substr(i, 2));
                if (!b)
                    parse_error(lineno, "bad byte string");
                mi.bytes.push_back(static_cast<std::uint8_t>(*b));
            }
            mi.mnemonic = j.at("mnemonic").get<std::string>();
            mi.operands = j.value("operands", "");
            f.instructions.push_back(std::move(mi));
        }
        catch (const nlohmann::json::exception& e)
        {
            parse_error(lineno, e.what());
        }
    }
    return finish(std::move(fns));
}

Disassembly parse_columnar(std::string_view text)
{
    std::vector<DisassembledFunction> fns;
    std::size_t lineno = 0;
    std::istringstream in{std::string{text}};
    std::string line;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t == "..." || t.starts_with("Disassembly of section"))
            continue;
        if (auto ins = parse_instr_line(line))
        {
            if (fns.empty())
                parse_error(lineno, "instruction before any function header");
            auto& f = fns.back();
            if (ins->text.empty())
            {
                if (f.instructions.empty())
                    parse_error(lineno, "byte continuation without an instruction");
                auto& prev = f.instructions.back().bytes;
                prev.insert(prev.end(), ins->bytes.begin(), ins->bytes.end());
                continue;
            }
            MachineInstr mi;
            mi.address = ins->address;
            mi.bytes = std::move(ins->bytes);
            split_instruction(ins->text, mi);
            f.instructions.push_back(std::move(mi));
            continue;
        }
        if (auto h = parse_header(line))
        {
            const auto idx = function_index_from_symbol(h->symbol).value_or(static_cast<std::uint32_t>(fns.size()));
            fns.push_back({idx, h->symbol, h->start, {}});
            continue;
        }
        if (!fns.empty())
            parse_error(lineno, "unrecognized line '" + std::string{t} + "'");
    }
    if (fns.empty())
        throw Error{Errc::DumpParseError, "no functions found in disassembly"};
    return finish(std::move(fns));
}
}  // namespace

const DisassembledFunction* Disassembly::find(std::uint32_t index) const noexcept
{
    for (const auto& f : functions)
        if (f.index == index)
            return &f;
    return nullptr;
}

std::optional<std::uint32_t> function_index_from_symbol(std::string_view s)
{
    const auto digits_at = [&](std::size_t pos) -> std::optional<std::uint32_t> {
        std::uint32_t v = 0;
        const auto [p, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
        if (ec != std::errc{} || p == s.data() + pos)
            return std::nullopt;
        return v;
    };
    if (const auto p = s.rfind("function["); p != std::string_view::npos)
        return digits_at(p + 9);
    if (s.starts_with("func"))
        if (auto v = digits_at(4))
            return v;
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9')
        --i;
    if (i < s.size())
        return digits_at(i);
    return std::nullopt;
}

Disassembly parse_disassembly(std::string_view text)
{
    for (const char c : text)
    {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
            continue;
        return c == '{' ? parse_normalized(text) : parse_columnar(text);
    }
    throw Error{Errc::DumpParseError, "empty disassembly"};
}

std::string serialize(const Disassembly& d)
{
    std::string out;
    const auto hex_bytes = [](const Bytes& b) {
        std::string s;
        for (const auto x : b)
            s += fmt::format("{:02x}", x);
        return s;
    };
    for (const auto& f : d.functions)
    {
        nlohmann::ordered_json h;
        h["func"] = f.index;
        h["symbol"] = f.symbol;
        h["start"] = fmt::format("0x{:x}", f.start);
        out += h.dump() + '\n';
        for (const auto& i : f.instructions)
        {
            nlohmann::ordered_json j;
            j["func"] = f.index;
            j["addr"] = fmt::format("0x{:x}", i.address);
            j["bytes"] = hex_bytes(i.bytes);
            j["mnemonic"] = i.mnemonic;
            j["operands"] = i.operands;
            out += j.dump() + '\n';
        }
    }
    return out;
}

std::string render_listing(const Disassembly& d)
{
    std::string out;
    for (const auto& f : d.functions)
    {
        out += fmt::format("{:016x} <{}>:\n", f.start, f.symbol);
        for (const auto& i : f.instructions)
        {
            std::string bytes;
            for (const auto b : i.bytes)
                bytes += fmt::format("{:02x} ", b);
            out += fmt::format("{:>8x}:\t{}\t{}{}{}\n", i.address, bytes, i.mnemonic, i.operands.empty() ? "" : " ",
                               i.operands);
        }
        out += '\n';
    }
    return out;
}
}  // namespace warplens::dis
