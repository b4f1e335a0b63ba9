// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/report.hpp"
#include "warplens/error.hpp"
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>

namespace warplens::report
{
namespace fs = std::filesystem;
using diff::EditKind;

namespace
{
std::string machine_line(const dis::DisassembledFunction* f, std::size_t i)
{
    if (f == nullptr || i == diff::npos)
        return {};
    const auto& in = f->instructions[i];
    return fmt::format("{:>8x}: {}{}{}", in.address, in.mnemonic, in.operands.empty() ? "" : " ", in.operands);
}

std::string html_escape(std::string_view s)
{
    std::string out;
    for (const char c : s)
    {
        switch (c)
        {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string hex(std::uint64_t v)
{
    return fmt::format("0x{:x}", v);
}

std::string function_heading(const diff::FunctionDiff& d)
{
    std::string where;
    if (d.presence == diff::Presence::OriginalOnly)
        where = " [original only]";
    else if (d.presence == diff::Presence::MutantOnly)
        where = " [mutant only]";
    return fmt::format("function {} ({}){}: {} -> {} instructions, start {} -> {}, identified {}, lcs {}, "
                       "bytes differ {}, address delta {}",
                       d.function, d.symbol, where, d.original_count, d.mutant_count, hex(d.original_start),
                       hex(d.mutant_start), d.identified(), d.script.lcs_length, d.bytes_differ ? "yes" : "no",
                       d.address_delta() ? "yes" : "no");
}

void diffs_text(std::string& out, const std::vector<diff::FunctionDiff>& diffs, const dis::Disassembly& a,
                const dis::Disassembly& b, const char* indent)
{
    bool any = false;
    for (const auto& d : diffs)
    {
        if (!d.changed())
            continue;
        any = true;
        out += fmt::format("{}{}\n", indent, function_heading(d));
        if (d.regions.empty())
            out += fmt::format("{}  no opcode differences\n", indent);
        const auto* fa = a.find(d.function);
        const auto* fb = b.find(d.function);
        for (std::size_t r = 0; r < d.regions.size(); ++r)
        {
            const auto& reg = d.regions[r];
            out += fmt::format("{}  region {}: {} deleted, {} inserted\n", indent, r + 1,
                               std::count_if(d.script.ops.begin() + static_cast<long>(reg.begin),
                                             d.script.ops.begin() + static_cast<long>(reg.end),
                                             [](const auto& e) { return e.kind == EditKind::Delete; }),
                               std::count_if(d.script.ops.begin() + static_cast<long>(reg.begin),
                                             d.script.ops.begin() + static_cast<long>(reg.end),
                                             [](const auto& e) { return e.kind == EditKind::Insert; }));
            for (auto i = reg.context_begin; i < reg.context_end; ++i)
            {
                const auto& e = d.script.ops[i];
                const char mark = e.kind == EditKind::Keep ? ' ' : e.kind == EditKind::Delete ? '-' : '+';
                out += fmt::format("{}    {} {:<44} | {}\n", indent, mark, machine_line(fa, e.a), machine_line(fb, e.b));
            }
        }
    }
    if (!any)
        out += fmt::format("{}machine code identical (opcodes, bytes and start addresses)\n", indent);
}

void excerpt_text(std::string& out, const WasmExcerpt& x, char mark)
{
    for (const auto& l : x.lines)
        out += fmt::format("    {} {:>4}  {}\n", l.highlighted ? mark : ' ', l.line, l.text);
}

std::string score_line(const select::MutantScore& s)
{
    return fmt::format("total {:.6f}: perf diff {:.6f} (ratio {:.6g}), func sim {:.6f} (ratio {:.6g})", s.total,
                       s.perf_score, s.perf_ratio, s.func_score, s.func_ratio);
}

void write_file(const fs::path& p, const std::string& content)
{
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out{p, std::ios::binary | std::ios::trunc};
    if (!out || !(out << content) || !out.flush())
        throw Error{Errc::OutputUnwritable, "cannot write " + p.string()};
}

std::string html_excerpt(const WasmExcerpt& x, const char* cls)
{
    std::string out = "<pre>";
    for (const auto& l : x.lines)
    {
        const auto text = fmt::format("{:>4}  {}", l.line, html_escape(l.text));
        out += l.highlighted ? fmt::format("<span class=\"{}\">{}</span>\n", cls, text) : text + "\n";
    }
    return out + "</pre>";
}
}  // namespace

WasmExcerpt make_excerpt(const wasm::Module& m, std::uint32_t function, std::size_t offset, std::size_t span,
                         std::size_t context)
{
    WasmExcerpt x;
    x.function = function;
    const auto* f = m.find_function(function);
    if (f == nullptr)
        return x;
    // Indentation from block nesting over the whole body.
    std::vector<std::size_t> depth(f->instructions.size());
    std::size_t d = 0;
    for (std::size_t i = 0; i < f->instructions.size(); ++i)
    {
        const auto op = f->instructions[i].instr.op;
        if (op == wasm::op::end || op == wasm::op::else_)
            d = d > 0 ? d - 1 : 0;
        depth[i] = d;
        if (op == wasm::op::block || op == wasm::op::loop || op == wasm::op::if_ || op == wasm::op::else_)
            ++d;
    }
    const auto first = offset >= context ? offset - context : 0;
    const auto last = std::min(f->instructions.size(), offset + span + context);
    for (auto i = first; i < last; ++i)
        x.lines.push_back({i + 1, std::string(2 * depth[i], ' ') + wasm::instr_text(f->instructions[i].instr),
                           i >= offset && i < offset + span});
    return x;
}

std::string render_diffs_text(const std::vector<diff::FunctionDiff>& diffs, const dis::Disassembly& original,
                              const dis::Disassembly& mutant)
{
    std::string out;
    diffs_text(out, diffs, original, mutant, "");
    out += fmt::format("identified original-side instructions: {}\n", diff::total_identified(diffs));
    return out;
}

std::string render_text(const ReportBundle& b)
{
    std::string out = fmt::format("warp-lens report for {}\n", b.input_name);
    out += fmt::format("weights: alpha {:g}, beta {:g}\n", b.weights.alpha, b.weights.beta);
    out += fmt::format("original medians: buggy {:.6g}, oracle {:.6g}\n", b.original_times.buggy,
                       b.original_times.oracle);
    out += fmt::format("mutants: {} qualified, {} disqualified\n\n", b.ranked.size(), b.disqualified.size());

    if (b.ranked.empty())
        out += "No qualified mutant found; no candidate to diff.\n\n";
    for (const auto& c : b.candidates)
    {
        out += fmt::format("== rank {}: mutant {} ({}) ==\n", c.rank, c.entry.ordinal, mutate::rule_name(c.entry.rule));
        out += score_line(c.score) + "\n";
        out += fmt::format("site: function {}, instruction {}, span {}\n", c.entry.function, c.entry.offset + 1,
                           c.entry.span);
        out += fmt::format("edit: {} => {}\n", c.entry.before, c.entry.after.empty() ? "(nothing)" : c.entry.after);
        out += "wasm original:\n";
        excerpt_text(out, c.original_wasm, '-');
        out += "wasm mutant:\n";
        excerpt_text(out, c.mutant_wasm, '+');
        out += "machine code:\n";
        if (!c.dump_error.empty())
            out += fmt::format("  unavailable: {}\n", c.dump_error);
        else
        {
            diffs_text(out, c.diffs, c.original_dis, c.mutant_dis, "  ");
            out += fmt::format("  identified original-side instructions: {}\n", diff::total_identified(c.diffs));
        }
        out += '\n';
    }

    out += "== scores ==\n";
    out += select::score_table(b.ranked, b.disqualified);
    if (!b.disqualified.empty())
    {
        out += "\n== disqualified ==\n";
        auto dq = b.disqualified;
        std::sort(dq.begin(), dq.end(), [](const auto& x, const auto& y) { return x.ordinal < y.ordinal; });
        for (const auto& s : dq)
            out += fmt::format("mutant {} ({}): {}\n", s.ordinal, mutate::rule_name(s.rule), s.reason);
    }
    return out;
}

std::string render_html(const ReportBundle& b)
{
    std::string out = R"(<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>warp-lens report</title>
<style>
body{font-family:sans-serif;margin:1.5em}
pre{font-family:monospace;font-size:12px;margin:0}
table.cols{border-collapse:collapse;width:100%}
table.cols td{vertical-align:top;border:1px solid #ccc;padding:4px;width:50%}
.del{background:#fdd;color:#900}
.ins{background:#dfd;color:#060}
.flag{font-weight:bold;color:#a60}
table.scores td,table.scores th{padding:2px 8px;font-size:12px;text-align:right}
</style></head><body>
)";
    out += fmt::format("<h1>warp-lens report: {}</h1>\n", html_escape(b.input_name));
    out += fmt::format("<p>weights: alpha {:g}, beta {:g}; original medians: buggy {:.6g}, oracle {:.6g}; "
                       "{} qualified, {} disqualified</p>\n",
                       b.weights.alpha, b.weights.beta, b.original_times.buggy, b.original_times.oracle,
                       b.ranked.size(), b.disqualified.size());
    if (b.ranked.empty())
        out += "<p class=\"flag\">No qualified mutant found; no candidate to diff.</p>\n";

    for (const auto& c : b.candidates)
    {
        out += fmt::format("<h2>Rank {}: mutant {} ({})</h2>\n<p>{}</p>\n", c.rank, c.entry.ordinal,
                           mutate::rule_name(c.entry.rule), html_escape(score_line(c.score)));
        out += fmt::format("<p>function {}, instruction {}: <code>{}</code> &rArr; <code>{}</code></p>\n",
                           c.entry.function, c.entry.offset + 1, html_escape(c.entry.before),
                           html_escape(c.entry.after.empty() ? "(nothing)" : c.entry.after));
        out += "<table class=\"cols\"><tr><th>original Wasm</th><th>mutant Wasm</th></tr><tr><td>";
        out += html_excerpt(c.original_wasm, "del") + "</td><td>" + html_excerpt(c.mutant_wasm, "ins");
        out += "</td></tr></table>\n";
        if (!c.dump_error.empty())
        {
            out += fmt::format("<p class=\"flag\">machine code unavailable: {}</p>\n", html_escape(c.dump_error));
            continue;
        }
        bool any = false;
        for (const auto& d : c.diffs)
        {
            if (!d.changed())
                continue;
            any = true;
            out += fmt::format("<h3>{}</h3>\n", html_escape(function_heading(d)));
            if (d.regions.empty())
                out += "<p class=\"flag\">no opcode differences</p>\n";
            const auto* fa = c.original_dis.find(d.function);
            const auto* fb = c.mutant_dis.find(d.function);
            for (const auto& reg : d.regions)
            {
                std::string left;
                std::string right;
                for (auto i = reg.context_begin; i < reg.context_end; ++i)
                {
                    const auto& e = d.script.ops[i];
                    const auto la = html_escape(machine_line(fa, e.a));
                    const auto lb = html_escape(machine_line(fb, e.b));
                    if (e.kind == EditKind::Keep)
                    {
                        left += la + "\n";
                        right += lb + "\n";
                    }
                    else if (e.kind == EditKind::Delete)
                        left += "<span class=\"del\">" + la + "</span>\n";
                    else
                        right += "<span class=\"ins\">" + lb + "</span>\n";
                }
                out += "<table class=\"cols\"><tr><td><pre>" + left + "</pre></td><td><pre>" + right +
                       "</pre></td></tr></table>\n";
            }
        }
        if (!any)
            out += "<p>machine code identical (opcodes, bytes and start addresses)</p>\n";
        out += fmt::format("<p>identified original-side instructions: {}</p>\n", diff::total_identified(c.diffs));
    }

    out += "<h2>Scores</h2>\n<table class=\"scores\">\n";
    const auto table = select::score_table(b.ranked, b.disqualified);
    std::size_t pos = 0;
    bool header = true;
    while (pos < table.size())
    {
        const auto nl = table.find('\n', pos);
        const auto row = std::string_view{table}.substr(pos, nl - pos);
        pos = nl + 1;
        out += "<tr>";
        std::size_t c = 0;
        while (true)
        {
            const auto tab = row.find('\t', c);
            const auto cell = row.substr(c, tab == std::string_view::npos ? std::string_view::npos : tab - c);
            out += fmt::format(header ? fmt::runtime("<th>{}</th>") : fmt::runtime("<td>{}</td>"), html_escape(cell));
            if (tab == std::string_view::npos)
                break;
            c = tab + 1;
        }
        out += "</tr>\n";
        header = false;
    }
    out += "</table>\n</body></html>\n";
    return out;
}

std::string render_summary(const ReportBundle& b)
{
    std::string out;
    for (const auto& c : b.candidates)
    {
        if (!c.dump_error.empty())
        {
            nlohmann::ordered_json j;
            j["rank"] = c.rank;
            j["ordinal"] = c.entry.ordinal;
            j["error"] = c.dump_error;
            out += j.dump() + '\n';
            continue;
        }
        const auto lines = diff::summary_jsonl(c.diffs);
        std::size_t pos = 0;
        while (pos < lines.size())
        {
            const auto nl = lines.find('\n', pos);
            const auto parsed = nlohmann::ordered_json::parse(lines.substr(pos, nl - pos));
            pos = nl + 1;
            nlohmann::ordered_json j;
            j["rank"] = c.rank;
            j["ordinal"] = c.entry.ordinal;
            for (const auto& [k, v] : parsed.items())
                j[k] = v;
            out += j.dump() + '\n';
        }
    }
    return out;
}

void render_report(const ReportBundle& b, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error{Errc::OutputUnwritable, "cannot create " + dir.string() + ": " + ec.message()};
    write_file(dir / "report.txt", render_text(b));
    write_file(dir / "report.html", render_html(b));
    write_file(dir / "summary.jsonl", render_summary(b));
    write_file(dir / "scores.tsv", select::score_table(b.ranked, b.disqualified));
    write_file(dir / "mutants" / "manifest.jsonl", b.manifest);
    if (!b.original_raw_dump.empty())
        write_file(dir / "dumps" / "original.dis", b.original_raw_dump);
    for (const auto& c : b.candidates)
        if (!c.mutant_raw_dump.empty())
            write_file(dir / "dumps" / fmt::format("mutant_{}.dis", c.entry.ordinal), c.mutant_raw_dump);
    nlohmann::ordered_json meta(b.metadata);
    write_file(dir / "metadata.json", meta.dump(2) + "\n");
}
}  // namespace warplens::report
