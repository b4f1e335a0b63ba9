// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/disassembly.hpp"
#include "warplens/machine_diff.hpp"
#include "warplens/module.hpp"
#include "warplens/mutation.hpp"
#include "warplens/selector.hpp"
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace warplens::report
{
struct ExcerptLine
{
    std::size_t line = 0;  ///< 1-based, relative to the function body
    std::string text;
    bool highlighted = false;
};

/// A window of one function body in text form.
struct WasmExcerpt
{
    std::uint32_t function = 0;
    std::vector<ExcerptLine> lines;
};

/// Lines [offset, offset + span) highlighted, with `context` lines around.
WasmExcerpt make_excerpt(const wasm::Module& m, std::uint32_t function, std::size_t offset, std::size_t span,
                         std::size_t context = 3);

struct Candidate
{
    std::size_t rank = 0;
    select::MutantScore score;
    mutate::ManifestEntry entry;
    WasmExcerpt original_wasm;
    WasmExcerpt mutant_wasm;
    dis::Disassembly original_dis;
    dis::Disassembly mutant_dis;
    std::string mutant_raw_dump;
    std::vector<diff::FunctionDiff> diffs;
    std::string dump_error;  ///< set when dumping or diffing failed
};

struct ReportBundle
{
    /// Run description written to metadata.json only; never rendered into the reports.
    std::map<std::string, std::string> metadata;
    std::string input_name;
    select::ScoreWeights weights;
    select::ProgramTimes original_times;
    std::vector<select::MutantScore> ranked;
    std::vector<select::MutantScore> disqualified;
    std::vector<Candidate> candidates;
    std::string original_raw_dump;
    std::string manifest;  ///< manifest.jsonl contents
};

std::string render_text(const ReportBundle& b);
std::string render_html(const ReportBundle& b);
/// One JSON object per (candidate, function).
std::string render_summary(const ReportBundle& b);

/// Plain-text rendition of machine diffs alone.
std::string render_diffs_text(const std::vector<diff::FunctionDiff>& diffs, const dis::Disassembly& original,
                              const dis::Disassembly& mutant);

/// Writes report.html, report.txt, summary.jsonl, scores.tsv, metadata.json,
/// dumps/original.dis, dumps/mutant_<ordinal>.dis and mutants/manifest.jsonl.
/// Throws Error{OutputUnwritable}.
void render_report(const ReportBundle& b, const std::filesystem::path& dir);
}  // namespace warplens::report
