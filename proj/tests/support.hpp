// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/module.hpp"
#include <filesystem>
#include <fstream>
#include <atomic>
#include <unistd.h>
#include <iterator>
#include <string>
#include <vector>

namespace warplens::testing
{
inline std::filesystem::path corpus_dir()
{
    return WARPLENS_CORPUS_DIR;
}

inline Bytes read_file(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    return {std::istreambuf_iterator<char>{in}, {}};
}

inline void write_file(const std::filesystem::path& p, ByteView bytes)
{
    std::ofstream out{p, std::ios::binary | std::ios::trunc};
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

/// Fresh directory removed on destruction.
class ScratchDir
{
public:
    explicit ScratchDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("warplens_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() { std::filesystem::remove_all(path_); }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::vector<std::filesystem::path> corpus_files()
{
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator{corpus_dir()})
        if (e.path().extension() == ".wasm")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

/// One-function module: `(func (param ...) (result ...) (local ...) body)`,
/// exported as `_start`, with optional globals and a one-page memory.
struct ModuleSpec
{
    std::vector<wasm::ValType> params;
    std::vector<wasm::ValType> results;
    std::vector<wasm::ValType> locals;
    std::vector<wasm::Instr> body;
    std::vector<wasm::GlobalType> globals;
    bool memory = false;
};

inline wasm::Module build_module(const ModuleSpec& spec)
{
    using namespace wasm;
    Module m;
    m.types.push_back({spec.params, spec.results});
    m.function_types.push_back(0);
    if (spec.memory)
        m.memories.push_back(Limits{0, 1, std::nullopt});
    for (const auto& g : spec.globals)
        m.globals.push_back({g, {make_const(g.type, 0)}});
    FunctionBody f;
    f.index = 0;
    f.type_index = 0;
    f.locals = spec.params;
    for (const auto t : spec.locals)
    {
        f.local_groups.push_back({1, t});
        f.locals.push_back(t);
    }
    for (const auto& in : spec.body)
    {
        InstrRecord r;
        r.instr = in;
        f.instructions.push_back(r);
    }
    m.functions.push_back(std::move(f));
    m.exports.push_back({"_start", ExternKind::Func, 0});
    classify_function(m, m.functions.back());
    return m;
}

inline wasm::Instr ins(wasm::Opcode op) { return wasm::make_simple(op); }
inline wasm::Instr ins(wasm::Opcode op, std::uint32_t idx) { return wasm::make_indexed(op, idx); }
inline wasm::Instr ins(std::string_view name)
{
    return wasm::make_simple(wasm::op_info(name)->code);
}
inline wasm::Instr ins(std::string_view name, std::uint32_t idx)
{
    return wasm::make_indexed(wasm::op_info(name)->code, idx);
}
}  // namespace warplens::testing
