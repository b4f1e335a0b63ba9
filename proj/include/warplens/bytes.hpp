// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/error.hpp"
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace warplens
{
using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Cursor over a Wasm binary. All reads are bounds-checked and throw
/// MalformedBinary with the failing offset.
class ByteReader
{
public:
    explicit ByteReader(ByteView data, std::size_t base = 0) noexcept : data_{data}, base_{base} {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t offset() const noexcept { return base_ + pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool eof() const noexcept { return pos_ >= data_.size(); }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error{Errc::MalformedBinary, what + " at offset " + std::to_string(offset())};
    }

    std::uint8_t u8()
    {
        if (eof())
            fail("unexpected end");
        return data_[pos_++];
    }

    std::uint8_t peek() const
    {
        if (eof())
            fail("unexpected end");
        return data_[pos_];
    }

    ByteView take(std::size_t n)
    {
        if (n > remaining())
            fail("length out of bounds");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint32_t fixed_u32()
    {
        auto b = take(4);
        return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
               std::uint32_t(b[3]) << 24;
    }

    std::uint64_t fixed_u64()
    {
        const std::uint64_t lo = fixed_u32();
        const std::uint64_t hi = fixed_u32();
        return lo | hi << 32;
    }

    std::uint32_t u32() { return static_cast<std::uint32_t>(uleb(32)); }
    std::uint64_t u64() { return uleb(64); }
    std::int32_t s32() { return static_cast<std::int32_t>(sleb(32)); }
    std::int64_t s33() { return sleb(33); }
    std::int64_t s64() { return sleb(64); }

    std::string name()
    {
        const auto n = u32();
        auto b = take(n);
        return {reinterpret_cast<const char*>(b.data()), b.size()};
    }

private:
    std::uint64_t uleb(unsigned bits)
    {
        std::uint64_t result = 0;
        unsigned shift = 0;
        for (unsigned i = 0;; ++i)
        {
            if (i >= (bits + 6) / 7)
                fail("integer representation too long");
            const std::uint8_t byte = u8();
            const std::uint64_t payload = byte & 0x7f;
            if (shift + 7 > bits && (payload >> (bits - shift)) != 0)
                fail("integer too large");
            result |= payload << shift;
            shift += 7;
            if ((byte & 0x80) == 0)
                return result;
        }
    }

    std::int64_t sleb(unsigned bits)
    {
        std::int64_t result = 0;
        unsigned shift = 0;
        for (unsigned i = 0;; ++i)
        {
            if (i >= (bits + 6) / 7)
                fail("integer representation too long");
            const std::uint8_t byte = u8();
            result |= static_cast<std::int64_t>(static_cast<std::uint64_t>(byte & 0x7f) << shift);
            shift += 7;
            if ((byte & 0x80) == 0)
            {
                if (shift > bits)
                {
                    // Unused bits of the last byte must replicate the sign bit.
                    const unsigned used = bits - (shift - 7);
                    const int sign_and_unused = static_cast<std::int8_t>(byte << 1) >> used;
                    if (sign_and_unused != 0 && sign_and_unused != -1)
                        fail("integer too large");
                }
                if (shift < 64 && (byte & 0x40))
                    result |= static_cast<std::int64_t>(~std::uint64_t{0} << shift);
                return result;
            }
        }
    }

    ByteView data_;
    std::size_t base_ = 0;
    std::size_t pos_ = 0;
};

inline void put_uleb(Bytes& out, std::uint64_t value)
{
    do
    {
        std::uint8_t byte = value & 0x7f;
        value >>= 7;
        if (value != 0)
            byte |= 0x80;
        out.push_back(byte);
    } while (value != 0);
}

inline void put_sleb(Bytes& out, std::int64_t value)
{
    bool more = true;
    while (more)
    {
        std::uint8_t byte = value & 0x7f;
        value >>= 7;
        if ((value == 0 && !(byte & 0x40)) || (value == -1 && (byte & 0x40)))
            more = false;
        else
            byte |= 0x80;
        out.push_back(byte);
    }
}

inline void put_fixed(Bytes& out, std::uint64_t value, unsigned width)
{
    for (unsigned i = 0; i < width; ++i)
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

inline void put_name(Bytes& out, const std::string& s)
{
    put_uleb(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

inline void put_section(Bytes& out, std::uint8_t id, const Bytes& payload)
{
    out.push_back(id);
    put_uleb(out, payload.size());
    out.insert(out.end(), payload.begin(), payload.end());
}
}  // namespace warplens
