// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/pipeline.hpp"
#include "warplens/digest.hpp"
#include "warplens/machine_diff.hpp"
#include "warplens/validator.hpp"
#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

namespace warplens::pipeline
{
namespace fs = std::filesystem;
using harness::MeasureOptions;
using harness::Runtime;
using harness::TimingSample;

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
    std::ifstream in{p, std::ios::binary};
    return {std::istreambuf_iterator<char>{in}, {}};
}

void write_atomic(const fs::path& p, const std::string& content)
{
    fs::create_directories(p.parent_path());
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        if (!out || !(out << content) || !out.flush())
            throw Error{Errc::OutputUnwritable, "cannot write " + tmp};
    }
    fs::rename(tmp, p);
}

nlohmann::json sample_json(const TimingSample& s)
{
    return {{"runs", s.runs}, {"warmups", s.warmups}, {"wall_median", s.wall_median}};
}

/// Timed measurement with a content-addressed cache in `dir`.
class SampleCache
{
public:
    SampleCache(fs::path dir, MeasureOptions base, const Logger& log) : dir_{std::move(dir)}, base_{base}, log_{log} {}

    TimingSample measure(const Runtime& rt, ByteView bytes, const fs::path& module, std::chrono::duration<double> timeout)
    {
        auto opt = base_;
        opt.timeout = timeout;
        const auto file = dir_ / (sample_key(bytes, rt.spec(), opt) + ".json");
        if (fs::exists(file))
        {
            try
            {
                const auto j = nlohmann::json::parse(read_text(file));
                auto s = harness::summarize(j.at("runs").get<std::vector<double>>(), j.at("warmups").get<std::size_t>(),
                                            opt.instability_threshold);
                s.wall_median = j.at("wall_median").get<double>();
                ++cached;
                return s;
            }
            catch (const nlohmann::json::exception&)
            {
                log_(fmt::format("ignoring corrupt timing cache entry {}", file.filename().string()));
            }
        }
        auto s = harness::measure_execution(rt, module, opt);
        timed_runs += opt.repetitions;
        if (s.unstable)
            log_(fmt::format("unstable timing for {} on {}: median {:.6g}, iqr {:.6g}", module.filename().string(),
                             rt.spec().name, s.median, s.iqr));
        write_atomic(file, sample_json(s).dump() + "\n");
        return s;
    }

    std::size_t timed_runs = 0;
    std::size_t cached = 0;

private:
    fs::path dir_;
    MeasureOptions base_;
    const Logger& log_;
};

std::chrono::duration<double> mutant_timeout(const config::PipelineConfig& cfg, const TimingSample& original)
{
    return std::chrono::duration<double>{std::max(cfg.timeout_floor, cfg.timeout_factor * original.wall_median)};
}

std::vector<select::FunctionalResult> functional_runs(const std::vector<mutate::Mutant>& mutants, const fs::path& dir,
                                                      const Runtime& buggy, const Runtime& oracle,
                                                      std::chrono::duration<double> tb,
                                                      std::chrono::duration<double> to, std::size_t parallelism)
{
    std::vector<select::FunctionalResult> out(mutants.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (auto i = next++; i < mutants.size(); i = next++)
        {
            try
            {
                const auto path = dir / mutate::mutant_filename(mutants[i]);
                out[i].ordinal = mutants[i].ordinal;
                out[i].rule = mutants[i].site.rule;
                out[i].buggy = harness::run_with_output(buggy, path, tb);
                out[i].oracle = harness::run_with_output(oracle, path, to);
            }
            catch (...)
            {
                const std::lock_guard lock{failure_mutex};
                if (!failure)
                    failure = std::current_exception();
                next = mutants.size();
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(parallelism, mutants.size()); ++t)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

mutate::ManifestEntry entry_of(const mutate::Mutant& m)
{
    return {m.ordinal, m.site.rule, m.site.function, m.site.offset, m.site.span, m.before, m.after,
            mutate::mutant_filename(m).string()};
}

void persist_scores(const fs::path& file, const select::ProgramTimes& original,
                    const std::vector<std::pair<select::MutantScore, select::ProgramTimes>>& scored,
                    const std::vector<select::MutantScore>& disqualified)
{
    std::string out = nlohmann::json{{"original", {{"buggy", original.buggy}, {"oracle", original.oracle}}}}.dump() + "\n";
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& [s, t] : scored)
        rows.push_back({{"ordinal", s.ordinal}, {"rule", mutate::rule_name(s.rule)}, {"buggy", t.buggy}, {"oracle", t.oracle}});
    for (const auto& s : disqualified)
        rows.push_back({{"ordinal", s.ordinal}, {"rule", mutate::rule_name(s.rule)}, {"reason", s.reason}});
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a["ordinal"] < b["ordinal"]; });
    for (const auto& r : rows)
        out += r.dump() + "\n";
    write_atomic(file, out);
}

std::string iso_now()
{
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}
}  // namespace

std::string sample_key(ByteView module, const harness::RuntimeSpec& spec, const MeasureOptions& opt)
{
    return sha256_hex(fmt::format("{}\n{}\n{}/{}", sha256_hex(module), spec.fingerprint(), opt.repetitions, opt.warmups));
}

PipelineResult run_pipeline(const config::PipelineConfig& cfg, const Runtime& buggy, const Runtime& oracle,
                            const Logger& log_in)
{
    const Logger log = log_in ? log_in : [](std::string_view) {};
    if (cfg.input.empty())
        throw Error{Errc::ConfigError, "no input module given"};
    cfg.weights.check();
    if (cfg.repetitions < 3 || cfg.top_k < 1 || cfg.parallelism < 1)
        throw Error{Errc::ConfigError, "reps >= 3, top_k >= 1 and parallelism >= 1 are required"};
    if (buggy.spec().fingerprint() == oracle.spec().fingerprint())
        throw Error{Errc::ConfigError, "buggy and oracle runtimes are identical"};

    PipelineResult res;
    auto& b = res.bundle;
    b.input_name = cfg.input.filename().string();
    b.weights = cfg.weights;
    const auto workdir = cfg.effective_workdir();
    try
    {
        const auto bytes = read_bytes(cfg.input);
        if (const auto v = wasm::validate_module(bytes); !v)
            throw Error{Errc::MalformedBinary, "input does not validate: " + v.describe()};
        const auto model = wasm::parse_module(bytes);

        // Original program: functional check, then measurement.
        const auto ob = harness::run_with_output(buggy, cfg.input, buggy.spec().timeout);
        const auto oo = harness::run_with_output(oracle, cfg.input, oracle.spec().timeout);
        if (!ob.ok() || !oo.ok())
            throw Error{Errc::MeasurementFailure,
                        fmt::format("original program fails on the {} runtime: {}", ob.ok() ? "oracle" : "buggy",
                                    ob.ok() ? oo.diagnostics : ob.diagnostics)};
        SampleCache cache{workdir / "timings", {cfg.repetitions, cfg.warmups, cfg.instability_threshold, {}}, log};
        const auto sb = cache.measure(buggy, bytes, cfg.input, buggy.spec().timeout);
        const auto so = cache.measure(oracle, bytes, cfg.input, oracle.spec().timeout);
        b.original_times = {sb.median, so.median};
        log(fmt::format("original medians: buggy {:.6g}, oracle {:.6g}", sb.median, so.median));

        // Mutants.
        const auto gen = mutate::generate_all_mutants(model, {cfg.pool, cfg.mutant_cap});
        res.generation = gen.stats;
        res.mutants = gen.mutants.size();
        const auto mutant_dir = workdir / "mutants";
        fs::remove_all(mutant_dir);
        mutate::persist_mutants(mutant_dir, gen.mutants);
        b.manifest = read_text(mutant_dir / "manifest.jsonl");
        log(fmt::format("generated {} mutants ({} candidates, {} duplicates{})", gen.mutants.size(),
                        gen.stats.candidates, gen.stats.duplicates, gen.stats.truncated ? ", truncated" : ""));

        // Functional runs, then the filter.
        const auto tb = mutant_timeout(cfg, sb);
        const auto to = mutant_timeout(cfg, so);
        const auto functional = functional_runs(gen.mutants, mutant_dir, buggy, oracle, tb, to, cfg.parallelism);
        auto filtered = select::filter_invalid(functional, oo.stdout_digest);
        log(fmt::format("{} of {} mutants qualified", filtered.qualified.size(), gen.mutants.size()));

        // Timed runs, serialized.
        std::vector<std::pair<select::MutantScore, select::ProgramTimes>> scored;
        std::vector<select::MutantScore> scores;
        for (const auto& q : filtered.qualified)
        {
            const auto& m = gen.mutants[q.ordinal - 1];
            const auto path = mutant_dir / mutate::mutant_filename(m);
            try
            {
                const auto mb = cache.measure(buggy, m.bytes, path, tb);
                const auto mo = cache.measure(oracle, m.bytes, path, to);
                const select::ProgramTimes t{mb.median, mo.median};
                auto s = select::score_mutant(b.original_times, t, cfg.weights);
                s.ordinal = q.ordinal;
                s.rule = q.rule;
                scored.emplace_back(s, t);
                scores.push_back(s);
            }
            catch (const Error& e)
            {
                if (e.code() != Errc::MeasurementFailure && e.code() != Errc::ZeroTiming)
                    throw;
                select::MutantScore s;
                s.ordinal = q.ordinal;
                s.rule = q.rule;
                s.disqualified = true;
                s.reason = "timed run failed";
                filtered.disqualified.push_back(s);
            }
        }
        res.qualified = scores.size();
        res.timed_runs = cache.timed_runs;
        res.cached_samples = cache.cached;
        log(fmt::format("timed runs: {} ({} cached samples)", res.timed_runs, res.cached_samples));
        b.ranked = select::rank_mutants(std::move(scores));
        std::sort(filtered.disqualified.begin(), filtered.disqualified.end(),
                  [](const auto& x, const auto& y) { return x.ordinal < y.ordinal; });
        b.disqualified = filtered.disqualified;
        persist_scores(workdir / "scores_input.jsonl", b.original_times, scored, b.disqualified);

        // Top-K machine-code diffs on the buggy runtime.
        const auto k = std::min(cfg.top_k, b.ranked.size());
        std::string original_dump_error;
        dis::Disassembly original_dis;
        if (k > 0)
        {
            try
            {
                b.original_raw_dump = buggy.dump(cfg.input);
                original_dis = dis::parse_disassembly(b.original_raw_dump);
            }
            catch (const Error& e)
            {
                original_dump_error = e.what();
                log(fmt::format("original dump failed: {}", e.what()));
            }
        }
        for (std::size_t i = 0; i < k; ++i)
        {
            const auto& s = b.ranked[i];
            const auto& m = gen.mutants[s.ordinal - 1];
            report::Candidate c;
            c.rank = i + 1;
            c.score = s;
            c.entry = entry_of(m);
            c.original_wasm = report::make_excerpt(model, m.site.function, m.site.offset, m.site.span);
            const auto mutant_model = wasm::parse_module(m.bytes);
            const auto* of = model.find_function(m.site.function);
            const auto* mf = mutant_model.find_function(m.site.function);
            const auto mspan = mf->instructions.size() + m.site.span - of->instructions.size();
            c.mutant_wasm = report::make_excerpt(mutant_model, m.site.function, m.site.offset, mspan);
            c.dump_error = original_dump_error;
            if (c.dump_error.empty())
            {
                try
                {
                    c.mutant_raw_dump = buggy.dump(mutant_dir / mutate::mutant_filename(m));
                    c.mutant_dis = dis::parse_disassembly(c.mutant_raw_dump);
                    c.original_dis = original_dis;
                    c.diffs = diff::isolate_slow_code(original_dis, c.mutant_dis);
                }
                catch (const Error& e)
                {
                    c.dump_error = e.what();
                }
            }
            b.candidates.push_back(std::move(c));
        }

        b.metadata = {{"input", cfg.input.string()},
                      {"buggy", buggy.spec().name},
                      {"buggy_invoke", buggy.spec().invoke},
                      {"buggy_fingerprint", buggy.spec().fingerprint()},
                      {"oracle", oracle.spec().name},
                      {"oracle_invoke", oracle.spec().invoke},
                      {"oracle_fingerprint", oracle.spec().fingerprint()},
                      {"alpha", fmt::format("{}", cfg.weights.alpha)},
                      {"beta", fmt::format("{}", cfg.weights.beta)},
                      {"repetitions", std::to_string(cfg.repetitions)},
                      {"warmups", std::to_string(cfg.warmups)},
                      {"mutants", std::to_string(res.mutants)},
                      {"qualified", std::to_string(res.qualified)},
                      {"timed_runs", std::to_string(res.timed_runs)},
                      {"cached_samples", std::to_string(res.cached_samples)},
                      {"workdir", workdir.string()},
                      {"finished_at", iso_now()}};
        report::render_report(b, cfg.out);
        if (b.ranked.empty())
        {
            res.exit_status = NoQualifiedMutants;
            res.message = gen.mutants.empty() ? "the module has no mutable instructions"
                                              : "no mutant passed the functional filter";
        }
        else
        {
            res.exit_status = ReportProduced;
            res.message = fmt::format("report written to {}", cfg.out.string());
        }
    }
    catch (const Error& e)
    {
        res.exit_status = OperationalFailure;
        res.message = e.what();
    }
    catch (const fs::filesystem_error& e)
    {
        res.exit_status = OperationalFailure;
        res.message = std::string{"OutputUnwritable: "} + e.what();
    }
    return res;
}

PersistedScores load_persisted_scores(const fs::path& workdir)
{
    const auto file = workdir / "scores_input.jsonl";
    std::ifstream in{file};
    if (!in)
        throw Error{Errc::ConfigError, "no persisted scores in " + workdir.string()};
    PersistedScores p;
    std::string line;
    bool first = true;
    try
    {
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto j = nlohmann::json::parse(line);
            if (first)
            {
                p.original = {j.at("original").at("buggy").get<double>(), j.at("original").at("oracle").get<double>()};
                first = false;
                continue;
            }
            select::MutantScore s;
            s.ordinal = j.at("ordinal").get<std::size_t>();
            s.rule = mutate::rule_from_name(j.at("rule").get<std::string>());
            if (j.contains("reason"))
            {
                s.disqualified = true;
                s.reason = j.at("reason").get<std::string>();
                p.disqualified.push_back(s);
            }
            else
                p.mutants.emplace_back(s, select::ProgramTimes{j.at("buggy").get<double>(), j.at("oracle").get<double>()});
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error{Errc::ConfigError, file.string() + ": " + e.what()};
    }
    if (first)
        throw Error{Errc::ConfigError, file.string() + " is empty"};
    return p;
}

std::vector<select::MutantScore> rescore(const PersistedScores& p, const select::ScoreWeights& w)
{
    w.check();
    std::vector<select::MutantScore> out;
    for (const auto& [meta, t] : p.mutants)
    {
        auto s = select::score_mutant(p.original, t, w);
        s.ordinal = meta.ordinal;
        s.rule = meta.rule;
        out.push_back(s);
    }
    return select::rank_mutants(std::move(out));
}
}  // namespace warplens::pipeline
