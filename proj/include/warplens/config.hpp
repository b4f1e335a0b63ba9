// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/harness.hpp"
#include "warplens/mutation.hpp"
#include "warplens/reduction.hpp"
#include "warplens/selector.hpp"
#include <filesystem>
#include <map>
#include <string>

namespace warplens::config
{
namespace fs = std::filesystem;

struct PipelineConfig
{
    fs::path input;
    fs::path out = "warp-lens-report";
    fs::path workdir;  ///< defaults to <out>/work
    harness::RuntimeSpec buggy;
    harness::RuntimeSpec oracle;
    select::ScoreWeights weights;
    std::size_t repetitions = 5;
    std::size_t warmups = 1;
    std::size_t top_k = 5;
    std::size_t mutant_cap = 2000;
    std::size_t parallelism = 4;
    double timeout_floor = 10.0;   ///< seconds
    double timeout_factor = 20.0;  ///< times the original's wall median
    double instability_threshold = 0.10;
    mutate::ImmediatePool pool = mutate::ImmediatePool::defaults();
    reduce::Band buggy_band;
    reduce::Band gap_band;

    /// Throws Error{ConfigError} naming the violated constraint.
    void check() const;
    fs::path effective_workdir() const;
};

/// Applies one top-level `key = value` setting. Keys match the config file
/// and the long command-line flags (`top_k` / `--top-k`).
void set_option(PipelineConfig& c, std::string_view key, std::string_view value);

/// Applies one `key = value` setting of a `[buggy]` / `[oracle]` section.
void set_runtime_option(harness::RuntimeSpec& spec, std::string_view key, std::string_view value);

/// Reads an INI file. Top-level keys are pipeline options; `[buggy]` and
/// `[oracle]` describe the runtimes. `{config_dir}` and any `{name}` in
/// `vars` are substituted in runtime command templates.
PipelineConfig load_config(const fs::path& file, const std::map<std::string, std::string>& vars = {});

/// Same as load_config over in-memory text; relative paths resolve against `base`.
PipelineConfig parse_config(const std::string& text, const fs::path& base,
                            const std::map<std::string, std::string>& vars = {});
}  // namespace warplens::config
