// Copyright 2026 The warp-lens Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "warplens/bytes.hpp"
#include <string>
#include <string_view>

namespace warplens
{
/// Lowercase hex SHA-256.
std::string sha256_hex(ByteView data);
std::string sha256_hex(std::string_view text);
}  // namespace warplens
