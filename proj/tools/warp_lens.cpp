// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/config.hpp"
#include "warplens/error.hpp"
#include "warplens/machine_diff.hpp"
#include "warplens/mock.hpp"
#include "warplens/pipeline.hpp"
#include "warplens/report.hpp"
#include "warplens/validator.hpp"
#include <CLI11.hpp>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>

namespace fs = std::filesystem;
using namespace warplens;

namespace
{
Bytes read_bytes(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        throw Error{Errc::ConfigError, "cannot read " + p.string()};
    return {std::istreambuf_iterator<char>{in}, {}};
}

std::string read_text(const fs::path& p)
{
    const auto b = read_bytes(p);
    return {b.begin(), b.end()};
}

fs::path self_path(const char* argv0)
{
    std::error_code ec;
    auto p = fs::read_symlink("/proc/self/exe", ec);
    return ec ? fs::absolute(argv0) : p;
}

void log_line(std::string_view s)
{
    std::cerr << "warp-lens: " << s << '\n';
}

/// Command-line overrides applied on top of the config file.
struct Overrides
{
    std::vector<std::pair<std::string, std::string>> values;

    void add(CLI::App* app, const std::string& flag, const std::string& help)
    {
        app->add_option_function<std::string>(
            flag, [this, flag](const std::string& v) { values.emplace_back(flag, v); }, help);
    }
    void apply(config::PipelineConfig& c) const
    {
        for (const auto& [k, v] : values)
            config::set_option(c, k, v);
    }
};

config::PipelineConfig load(const fs::path& file, const fs::path& self)
{
    return config::load_config(file, {{"warp_lens", self.string()}});
}

int cmd_run(const fs::path& config_file, const Overrides& over, const fs::path& self)
{
    auto c = load(config_file, self);
    if (const char* w = std::getenv("WARP_LENS_WORKDIR"); w != nullptr && *w != '\0')
        c.workdir = w;
    over.apply(c);
    c.check();
    const harness::ProcessRuntime buggy{c.buggy};
    const harness::ProcessRuntime oracle{c.oracle};
    const auto r = pipeline::run_pipeline(c, buggy, oracle, log_line);
    log_line(r.message);
    return r.exit_status;
}

int cmd_mutate(const fs::path& module, const fs::path& out, std::size_t cap)
{
    const auto bytes = read_bytes(module);
    if (const auto v = wasm::validate_module(bytes); !v)
        throw Error{Errc::MalformedBinary, v.describe()};
    const auto gen = mutate::generate_all_mutants(wasm::parse_module(bytes), {mutate::ImmediatePool::defaults(), cap});
    mutate::persist_mutants(out, gen.mutants);
    fmt::print("{} mutants written to {} ({} candidates, {} duplicates, {} invalid, {} truncated)\n",
               gen.mutants.size(), out.string(), gen.stats.candidates, gen.stats.duplicates, gen.stats.invalid,
               gen.stats.truncated);
    return gen.mutants.empty() ? pipeline::NoQualifiedMutants : 0;
}

int cmd_score(const fs::path& workdir, const Overrides& over)
{
    config::PipelineConfig c;
    over.apply(c);
    const auto p = pipeline::load_persisted_scores(workdir);
    fmt::print("{}", select::score_table(pipeline::rescore(p, c.weights), p.disqualified));
    return p.mutants.empty() ? pipeline::NoQualifiedMutants : 0;
}

int cmd_diff(const fs::path& a, const fs::path& b)
{
    const auto da = dis::parse_disassembly(read_text(a));
    const auto db = dis::parse_disassembly(read_text(b));
    fmt::print("{}", report::render_diffs_text(diff::isolate_slow_code(da, db), da, db));
    return 0;
}

int cmd_validate_reduction(const fs::path& config_file, const Overrides& over, const fs::path& original,
                           const fs::path& reduced, const fs::path& self)
{
    auto c = load(config_file, self);
    c.input = original;
    over.apply(c);
    c.check();
    const harness::ProcessRuntime buggy{c.buggy};
    const harness::ProcessRuntime oracle{c.oracle};
    harness::MeasureOptions m{c.repetitions, c.warmups, c.instability_threshold,
                              std::min(c.buggy.timeout, c.oracle.timeout)};
    const auto v = reduce::validate_reduction(original, reduced, buggy, oracle, m, c.buggy_band, c.gap_band);
    fmt::print("{}", reduce::describe(v));
    return v.pass() ? 0 : pipeline::NoQualifiedMutants;
}

int cmd_mock_run(const std::optional<fs::path>& cost_file, bool dump, const std::string& entry, const fs::path& module)
{
    const auto cost = cost_file ? mock::CostModel::load(*cost_file) : mock::CostModel::uniform();
    const auto m = wasm::parse_module(read_bytes(module));
    if (dump)
    {
        mock::check_supported(m);
        fmt::print("{}", dis::render_listing(mock::mock_dump(m, cost)));
        return 0;
    }
    const auto r = mock::interpret_with_cost(m, cost, entry);
    fmt::print("{}", r.output());
    switch (r.status)
    {
    case mock::Status::Ok:
        fmt::print("@warp-lens pseudo-time {}\n", r.pseudo_time);
        return 0;
    case mock::Status::Trap:
        fmt::print("@warp-lens trap {}\n", r.trap);
        return 3;
    case mock::Status::BudgetExceeded:
        fmt::print("@warp-lens timeout\n");
        return 4;
    }
    return 1;
}

int cmd_validate(const fs::path& module)
{
    const auto v = wasm::validate_module(read_bytes(module));
    fmt::print("{}\n", v ? "valid" : v.describe());
    return v ? 0 : 1;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mutation-based performance debugger for WebAssembly runtimes", "warp-lens"};
    app.require_subcommand(1);
    const auto self = self_path(argv[0]);

    fs::path config_file, module, out, workdir, other;
    std::size_t cap = 2000;
    Overrides run_over, score_over, red_over;

    auto* run = app.add_subcommand("run", "Mutate, measure, rank and report");
    run->add_option("--config", config_file, "INI file describing the runtimes")->required()->check(CLI::ExistingFile);
    for (const auto* f : {"--input", "--out", "--workdir", "--alpha", "--beta", "--reps", "--warmups", "--top-k",
                          "--mutant-cap", "--parallelism", "--timeout-floor", "--timeout-factor"})
        run_over.add(run, f, "overrides the config file");

    auto* mut = app.add_subcommand("mutate", "Write every mutant of a module to a directory");
    mut->add_option("module", module)->required()->check(CLI::ExistingFile);
    mut->add_option("--out", out, "output directory")->required();
    mut->add_option("--mutant-cap", cap);

    auto* score = app.add_subcommand("score", "Rescore persisted timings from a working directory");
    score->add_option("--workdir", workdir)->required()->check(CLI::ExistingDirectory);
    score_over.add(score, "--alpha", "performance weight");
    score_over.add(score, "--beta", "similarity weight");

    auto* dif = app.add_subcommand("diff", "Diff two disassembly listings");
    dif->add_option("original", module)->required()->check(CLI::ExistingFile);
    dif->add_option("mutant", other)->required()->check(CLI::ExistingFile);

    auto* red = app.add_subcommand("validate-reduction", "Check that a reduced module keeps the slowdown");
    red->add_option("--config", config_file)->required()->check(CLI::ExistingFile);
    red->add_option("original", module)->required()->check(CLI::ExistingFile);
    red->add_option("reduced", other)->required()->check(CLI::ExistingFile);
    for (const auto* f : {"--reps", "--warmups", "--buggy-band", "--gap-band"})
        red_over.add(red, f, "overrides the config file");

    std::optional<fs::path> cost_file;
    bool dump = false;
    std::string entry;
    auto* mock_run = app.add_subcommand("mock-run", "Run a module on the built-in cost-model interpreter");
    mock_run->add_option("--cost-model", cost_file)->check(CLI::ExistingFile);
    mock_run->add_flag("--dump", dump, "print the pseudo machine code instead of running");
    mock_run->add_option("--entry", entry, "exported function to call");
    mock_run->add_option("module", module)->required()->check(CLI::ExistingFile);

    auto* val = app.add_subcommand("validate", "Validate a module");
    val->add_option("module", module)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    try
    {
        if (*run)
            return cmd_run(config_file, run_over, self);
        if (*mut)
            return cmd_mutate(module, out, cap);
        if (*score)
            return cmd_score(workdir, score_over);
        if (*dif)
            return cmd_diff(module, other);
        if (*red)
            return cmd_validate_reduction(config_file, red_over, module, other, self);
        if (*mock_run)
            return cmd_mock_run(cost_file, dump, entry, module);
        if (*val)
            return cmd_validate(module);
    }
    catch (const Error& e)
    {
        std::cerr << "warp-lens: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "warp-lens: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
