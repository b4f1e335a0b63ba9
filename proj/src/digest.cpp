// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#include "warplens/digest.hpp"
#include <array>
#include <openssl/evp.h>

namespace warplens
{
std::string sha256_hex(ByteView data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error{Errc::MeasurementFailure, "SHA-256 computation failed"};
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_hex(std::string_view text)
{
    return sha256_hex(ByteView{reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}
}  // namespace warplens
