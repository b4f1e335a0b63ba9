// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/config.hpp"
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

namespace warplens::config
{
namespace
{
std::string fmt_key(std::string_view key, std::string_view value, std::string_view why)
{
    return std::string{key} + " = '" + std::string{value} + "': " + std::string{why};
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why)
{
    throw Error{Errc::ConfigError, fmt_key(key, value, why)};
}

std::string normalize_key(std::string_view key)
{
    std::string k{key};
    while (!k.empty() && k.front() == '-')
        k.erase(0, 1);
    for (auto& c : k)
        if (c == '-')
            c = '_';
    return k;
}

std::size_t to_size(std::string_view key, std::string_view v)
{
    std::size_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        bad(key, v, "expected a non-negative integer");
    return out;
}

double to_double(std::string_view key, std::string_view v)
{
    double out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        bad(key, v, "expected a number");
    return out;
}

bool to_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "yes" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "0")
        return false;
    bad(key, v, "expected true or false");
}

reduce::Band to_band(std::string_view key, std::string_view v)
{
    const auto comma = v.find(',');
    if (comma == std::string_view::npos)
        bad(key, v, "expected 'low,high'");
    reduce::Band b{to_double(key, v.substr(0, comma)), to_double(key, v.substr(comma + 1))};
    try
    {
        b.check();
    }
    catch (const Error&)
    {
        bad(key, v, "need 0 < low <= high");
    }
    return b;
}

std::string substitute(std::string s, const std::map<std::string, std::string>& vars)
{
    for (const auto& [name, value] : vars)
    {
        const auto token = "{" + name + "}";
        for (auto p = s.find(token); p != std::string::npos; p = s.find(token, p + value.size()))
            s.replace(p, token.size(), value);
    }
    return s;
}
}  // namespace

void PipelineConfig::check() const
{
    if (input.empty())
        throw Error{Errc::ConfigError, "no input module given"};
    buggy.check();
    oracle.check();
    if (buggy.fingerprint() == oracle.fingerprint())
        throw Error{Errc::ConfigError, "buggy and oracle runtimes are identical"};
    weights.check();
    if (repetitions < 3)
        throw Error{Errc::ConfigError, "reps must be at least 3"};
    if (top_k < 1)
        throw Error{Errc::ConfigError, "top_k must be at least 1"};
    if (mutant_cap < 1)
        throw Error{Errc::ConfigError, "mutant_cap must be at least 1"};
    if (parallelism < 1)
        throw Error{Errc::ConfigError, "parallelism must be at least 1"};
    if (!(timeout_floor > 0) || !(timeout_factor > 0))
        throw Error{Errc::ConfigError, "timeouts must be positive"};
    if (!(instability_threshold >= 0))
        throw Error{Errc::ConfigError, "instability_threshold must be non-negative"};
    buggy_band.check();
    gap_band.check();
}

fs::path PipelineConfig::effective_workdir() const
{
    return workdir.empty() ? out / "work" : workdir;
}

void set_option(PipelineConfig& c, std::string_view raw_key, std::string_view v)
{
    const auto key = normalize_key(raw_key);
    if (key == "input")
        c.input = std::string{v};
    else if (key == "out")
        c.out = std::string{v};
    else if (key == "workdir")
        c.workdir = std::string{v};
    else if (key == "alpha")
        c.weights.alpha = to_double(key, v);
    else if (key == "beta")
        c.weights.beta = to_double(key, v);
    else if (key == "reps" || key == "repetitions")
        c.repetitions = to_size(key, v);
    else if (key == "warmups")
        c.warmups = to_size(key, v);
    else if (key == "top_k")
        c.top_k = to_size(key, v);
    else if (key == "mutant_cap")
        c.mutant_cap = to_size(key, v);
    else if (key == "parallelism")
        c.parallelism = to_size(key, v);
    else if (key == "timeout_floor")
        c.timeout_floor = to_double(key, v);
    else if (key == "timeout_factor")
        c.timeout_factor = to_double(key, v);
    else if (key == "instability_threshold")
        c.instability_threshold = to_double(key, v);
    else if (key == "pool_i32")
        c.pool.i32 = mutate::parse_pool(wasm::ValType::i32, v);
    else if (key == "pool_i64")
        c.pool.i64 = mutate::parse_pool(wasm::ValType::i64, v);
    else if (key == "pool_f32")
        c.pool.f32 = mutate::parse_pool(wasm::ValType::f32, v);
    else if (key == "pool_f64")
        c.pool.f64 = mutate::parse_pool(wasm::ValType::f64, v);
    else if (key == "pool_negate")
        c.pool.negate_original = to_bool(key, v);
    else if (key == "buggy_band")
        c.buggy_band = to_band(key, v);
    else if (key == "gap_band")
        c.gap_band = to_band(key, v);
    else
        bad(key, v, "unknown option");
}

void set_runtime_option(harness::RuntimeSpec& s, std::string_view raw_key, std::string_view v)
{
    const auto key = normalize_key(raw_key);
    if (key == "name")
        s.name = std::string{v};
    else if (key == "invoke")
        s.invoke = std::string{v};
    else if (key == "dump")
        s.dump = std::string{v};
    else if (key == "timeout")
        s.timeout = std::chrono::duration<double>{to_double(key, v)};
    else if (key == "timing")
    {
        if (v == "wall")
            s.timing = harness::TimingSource::Wall;
        else if (v == "reported")
            s.timing = harness::TimingSource::Reported;
        else
            bad(key, v, "expected wall or reported");
    }
    else if (key == "trap_exit_codes")
    {
        s.trap_exit_codes.clear();
        std::istringstream in{std::string{v}};
        for (std::string tok; std::getline(in, tok, ',');)
        {
            while (!tok.empty() && tok.front() == ' ')
                tok.erase(0, 1);
            while (!tok.empty() && tok.back() == ' ')
                tok.pop_back();
            if (!tok.empty())
                s.trap_exit_codes.insert(static_cast<int>(to_size(key, tok)));
        }
    }
    else if (key.starts_with("env.") && key.size() > 4)
        s.env[std::string{raw_key.substr(4)}] = std::string{v};
    else
        bad(key, v, "unknown runtime option");
}

PipelineConfig parse_config(const std::string& text, const fs::path& base, const std::map<std::string, std::string>& vars)
{
    boost::property_tree::ptree tree;
    try
    {
        std::istringstream in{text};
        boost::property_tree::ini_parser::read_ini(in, tree);
    }
    catch (const boost::property_tree::ini_parser_error& e)
    {
        throw Error{Errc::ConfigError, fmt_key("config", "", e.message() + " at line " + std::to_string(e.line()))};
    }
    auto all_vars = vars;
    all_vars.emplace("config_dir", base.string());

    PipelineConfig c;
    c.buggy.role = harness::Role::Buggy;
    c.oracle.role = harness::Role::Oracle;
    c.buggy.name = "buggy";
    c.oracle.name = "oracle";
    for (const auto& [key, node] : tree)
    {
        if (node.empty())
        {
            set_option(c, key, node.data());
            continue;
        }
        harness::RuntimeSpec* spec = key == "buggy" ? &c.buggy : key == "oracle" ? &c.oracle : nullptr;
        if (spec == nullptr)
            throw Error{Errc::ConfigError, "unknown section [" + key + "]"};
        for (const auto& [k, v] : node)
            set_runtime_option(*spec, k, v.data());
        spec->invoke = substitute(spec->invoke, all_vars);
        spec->dump = substitute(spec->dump, all_vars);
    }
    for (auto* p : {&c.input, &c.out, &c.workdir})
        if (!p->empty() && p->is_relative())
            *p = base / *p;
    return c;
}

PipelineConfig load_config(const fs::path& file, const std::map<std::string, std::string>& vars)
{
    std::ifstream in{file};
    if (!in)
        throw Error{Errc::ConfigError, "cannot read config " + file.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::absolute(file).parent_path(), vars);
}
}  // namespace warplens::config
