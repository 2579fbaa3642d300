// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace srvscan {

/// Unsigned 256-bit word with EVM wrap-around semantics.
using U256 = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<
    256, 256, boost::multiprecision::unsigned_magnitude, boost::multiprecision::unchecked, void>>;

/// Lowercase `0x`-prefixed hex without leading zeros (`0x0` for zero).
std::string to_hex(const U256& v);

/// Accepts `0x`/`0X` prefix, either case, leading zeros; at most 64 digits.
std::optional<U256> parse_u256_hex(std::string_view text);

/// Big-endian bytes, at most 32 of them.
U256 u256_from_be(std::span<const std::uint8_t> bytes);

/// Value fits in `width` bits.
bool fits_bits(const U256& v, unsigned width);

inline std::uint64_t low_u64(const U256& v) { return static_cast<std::uint64_t>(v & U256(~std::uint64_t{0})); }

}  // namespace srvscan
