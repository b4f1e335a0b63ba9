// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/harness.hpp"
#include "warplens/digest.hpp"
#include "warplens/process.hpp"
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace warplens::harness
{
namespace
{
constexpr std::string_view kPlaceholder = "{module}";
constexpr std::string_view kStatusPrefix = "@warp-lens ";

std::mutex g_measure_mutex;
std::atomic<int> g_in_flight{0};
std::atomic<int> g_max_in_flight{0};
std::atomic<std::size_t> g_timed_runs{0};
thread_local bool t_held = false;

std::size_t count_placeholders(const std::string& s)
{
    std::size_t n = 0;
    for (auto p = s.find(kPlaceholder); p != std::string::npos; p = s.find(kPlaceholder, p + 1))
        ++n;
    return n;
}

double quantile(const std::vector<double>& sorted, double p)
{
    if (sorted.empty())
        return 0;
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}
}  // namespace

void RuntimeSpec::check() const
{
    if (name.empty())
        throw Error{Errc::ConfigError, "runtime without a name"};
    if (count_placeholders(invoke) != 1)
        throw Error{Errc::ConfigError, "runtime '" + name + "': invoke template must contain {module} exactly once"};
    if (!dump.empty() && count_placeholders(dump) != 1)
        throw Error{Errc::ConfigError, "runtime '" + name + "': dump template must contain {module} exactly once"};
    if (timeout.count() <= 0)
        throw Error{Errc::ConfigError, "runtime '" + name + "': timeout must be positive"};
}

std::string RuntimeSpec::fingerprint() const
{
    nlohmann::ordered_json j;
    j["name"] = name;
    j["invoke"] = invoke;
    j["env"] = env;
    j["timing"] = timing == TimingSource::Wall ? "wall" : "reported";
    j["trap_exit_codes"] = trap_exit_codes;
    return sha256_hex(j.dump());
}

std::vector<std::string> expand_template(const std::string& tmpl, const fs::path& module)
{
    auto words = split_command(tmpl);
    for (auto& w : words)
        for (auto p = w.find(kPlaceholder); p != std::string::npos; p = w.find(kPlaceholder, p))
        {
            w.replace(p, kPlaceholder.size(), module.string());
            p += module.string().size();
        }
    return words;
}

void apply_status_lines(const std::string& raw_stdout, RunRecord& rec)
{
    std::istringstream in{raw_stdout};
    std::string line;
    rec.output.clear();
    while (std::getline(in, line))
    {
        if (!line.starts_with(kStatusPrefix))
        {
            rec.output += line;
            rec.output += '\n';
            continue;
        }
        const std::string_view body = std::string_view{line}.substr(kStatusPrefix.size());
        if (body.starts_with("pseudo-time "))
        {
            try
            {
                rec.reported = std::stod(std::string{body.substr(12)});
            }
            catch (const std::exception&)
            {
                throw Error{Errc::MeasurementFailure, "unparsable status line: " + line};
            }
        }
        else if (body.starts_with("trap"))
        {
            rec.trapped = true;
            rec.diagnostics = std::string{body.size() > 5 ? body.substr(5) : std::string_view{"trap"}};
        }
        else if (body.starts_with("timeout"))
            rec.timed_out = true;
    }
}

ProcessRuntime::ProcessRuntime(RuntimeSpec spec) : spec_{std::move(spec)}
{
    spec_.check();
}

RunRecord ProcessRuntime::run(const fs::path& module, std::chrono::duration<double> timeout) const
{
    const auto r = run_process(expand_template(spec_.invoke, module), spec_.env, timeout);
    RunRecord rec;
    rec.wall_seconds = r.seconds;
    rec.timed_out = r.timed_out;
    apply_status_lines(r.out, rec);
    if (r.timed_out)
        rec.exit_status = -1;
    else if (r.signal != 0)
    {
        rec.exit_status = 128 + r.signal;
        rec.trapped = true;
        if (rec.diagnostics.empty())
            rec.diagnostics = "terminated by signal " + std::to_string(r.signal);
    }
    else
    {
        rec.exit_status = r.exit_code;
        if (spec_.trap_exit_codes.contains(r.exit_code))
            rec.trapped = true;
    }
    if (rec.diagnostics.empty() && rec.exit_status != 0)
        rec.diagnostics = r.err.substr(0, 400);
    return rec;
}

std::string ProcessRuntime::dump(const fs::path& module) const
{
    if (spec_.dump.empty())
        throw Error{Errc::DumpUnsupported, "runtime '" + spec_.name + "' has no dump adapter"};
    const auto r = run_process(expand_template(spec_.dump, module), spec_.env, spec_.timeout);
    if (r.timed_out || r.signal != 0 || r.exit_code != 0)
        throw Error{Errc::DumpParseError, "dump adapter for '" + spec_.name + "' failed: " + r.err.substr(0, 400)};
    return r.out;
}

TimingSample summarize(std::vector<double> values, std::size_t warmups, double instability_threshold)
{
    TimingSample s;
    s.runs = values;
    s.repetitions = values.size();
    s.warmups = warmups;
    std::sort(values.begin(), values.end());
    s.median = quantile(values, 0.5);
    s.iqr = quantile(values, 0.75) - quantile(values, 0.25);
    s.unstable = s.iqr > instability_threshold * s.median;
    return s;
}

ExecutionOutcome run_with_output(const Runtime& rt, const fs::path& module, std::chrono::duration<double> timeout)
{
    const auto rec = rt.run(module, timeout);
    ExecutionOutcome o;
    o.exit_status = rec.exit_status;
    o.trapped = rec.trapped;
    o.timed_out = rec.timed_out;
    o.stdout_digest = sha256_hex(rec.output);
    o.diagnostics = rec.diagnostics;
    return o;
}

TimingSample measure_execution(const Runtime& rt, const fs::path& module, const MeasureOptions& opt)
{
    if (opt.repetitions < 3)
        throw Error{Errc::ConfigError, "at least 3 repetitions are required"};
    MeasurementToken token;
    std::vector<double> values;
    std::vector<double> walls;
    for (std::size_t i = 0; i < opt.warmups + opt.repetitions; ++i)
    {
        const auto rec = rt.run(module, opt.timeout);
        if (rec.trapped || rec.timed_out || rec.exit_status != 0)
            throw Error{Errc::MeasurementFailure, "timed run of " + module.filename().string() + " on '" +
                                                      rt.spec().name + "' failed" +
                                                      (rec.diagnostics.empty() ? "" : ": " + rec.diagnostics)};
        if (i < opt.warmups)
            continue;
        MeasurementToken::count_timed_run();
        double v = rec.wall_seconds;
        if (rt.spec().timing == TimingSource::Reported)
        {
            if (!rec.reported)
                throw Error{Errc::MeasurementFailure, "runtime '" + rt.spec().name + "' printed no pseudo-time line"};
            v = *rec.reported;
        }
        values.push_back(v);
        walls.push_back(rec.wall_seconds);
    }
    auto s = summarize(std::move(values), opt.warmups, opt.instability_threshold);
    std::sort(walls.begin(), walls.end());
    s.wall_median = quantile(walls, 0.5);
    return s;
}

dis::Disassembly dump_machine_code(const Runtime& rt, const fs::path& module)
{
    return dis::parse_disassembly(rt.dump(module));
}

MeasurementToken::MeasurementToken() : lock_{g_measure_mutex}
{
    const int now = ++g_in_flight;
    int prev = g_max_in_flight.load();
    while (now > prev && !g_max_in_flight.compare_exchange_weak(prev, now))
    {
    }
    t_held = true;
}

MeasurementToken::~MeasurementToken()
{
    t_held = false;
    --g_in_flight;
}

bool MeasurementToken::held() noexcept
{
    return t_held;
}

int MeasurementToken::max_concurrent() noexcept
{
    return g_max_in_flight.load();
}

std::size_t MeasurementToken::total_timed_runs() noexcept
{
    return g_timed_runs.load();
}

void MeasurementToken::reset_counters() noexcept
{
    g_max_in_flight = 0;
    g_timed_runs = 0;
}

void MeasurementToken::count_timed_run() noexcept
{
    ++g_timed_runs;
}
}  // namespace warplens::harness
