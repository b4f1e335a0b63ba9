// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/module.hpp"
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace warplens::mutate
{
using wasm::Instr;
using wasm::Module;
using wasm::ValType;

enum class Rule : std::uint8_t
{
    OperandSubst = 1,
    OperatorSubst = 2,
    OperatorDelete = 3,
};

std::string_view rule_name(Rule r) noexcept;  ///< "rule1" .. "rule3"
Rule rule_from_name(std::string_view s);

/// A contiguous span of one function body that a rule rewrites.
struct MutationSite
{
    std::uint32_t function = 0;  ///< module function index
    std::size_t offset = 0;      ///< first record of the span
    std::size_t span = 1;        ///< records replaced (2 for a fused load pair, >=1 for deletion)
    Rule rule = Rule::OperandSubst;

    bool operator==(const MutationSite&) const = default;
};

struct Mutant
{
    std::size_t ordinal = 0;  ///< 1-based position in the emitted set; 0 until assigned
    MutationSite site;
    std::vector<Instr> replacement;
    std::string before;  ///< original span as text, records joined by "; "
    std::string after;   ///< replacement as text ("" for an empty replacement)
    Bytes bytes;
};

/// Replacement constants per numeric type, as raw bits.
struct ImmediatePool
{
    std::vector<std::uint64_t> i32;
    std::vector<std::uint64_t> i64;
    std::vector<std::uint64_t> f32;
    std::vector<std::uint64_t> f64;
    /// Also offer the arithmetic negation of the original constant.
    bool negate_original = true;

    static ImmediatePool defaults();
    const std::vector<std::uint64_t>& for_type(ValType t) const;
    std::vector<std::uint64_t>& for_type(ValType t);
};

/// Parses a comma-separated list of literals for one type, e.g. "0,1,-1".
std::vector<std::uint64_t> parse_pool(ValType t, std::string_view text);

struct MutationConfig
{
    ImmediatePool pool = ImmediatePool::defaults();
    std::size_t cap = 2000;
};

struct GenerationStats
{
    std::size_t candidates = 0;
    std::size_t duplicates = 0;
    std::size_t invalid = 0;
    std::size_t truncated = 0;
};

struct GenerationResult
{
    std::vector<Mutant> mutants;
    GenerationStats stats;
};

std::vector<MutationSite> enumerate_mutation_sites(const Module& model);

/// Each apply_rule* returns an empty list when the site has no candidate
/// replacement. Returned mutants carry encoded bytes but are not validated.
std::vector<Mutant> apply_rule1(const Module& model, const MutationSite& site,
                                const ImmediatePool& pool = ImmediatePool::defaults());
std::vector<Mutant> apply_rule2(const Module& model, const MutationSite& site);
/// Throws Error{IllegalSpan} when the span is not a deletable operator pattern.
Mutant apply_rule3(const Module& model, const MutationSite& site);

/// All rule applications over all sites, validated, deduplicated by bytes
/// (the original's bytes included), truncated to `config.cap`, ordinals assigned.
GenerationResult generate_all_mutants(const Module& model, const MutationConfig& config = {});

/// The model with `site`'s span replaced and the function reclassified.
Module apply_edit(const Module& model, const MutationSite& site, const std::vector<Instr>& replacement);

/// Writes `mutant_<ordinal>_<rule>.wasm` files plus `manifest.jsonl` into `dir`.
void persist_mutants(const std::filesystem::path& dir, const std::vector<Mutant>& mutants);
std::filesystem::path mutant_filename(const Mutant& m);

struct ManifestEntry
{
    std::size_t ordinal = 0;
    Rule rule = Rule::OperandSubst;
    std::uint32_t function = 0;
    std::size_t offset = 0;
    std::size_t span = 1;
    std::string before;
    std::string after;
    std::string file;

    bool operator==(const ManifestEntry&) const = default;
};

std::string manifest_line(const Mutant& m);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file);
}  // namespace warplens::mutate
