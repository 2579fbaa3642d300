// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/u256.hpp"
#include "srvscan/error.hpp"

#include <algorithm>

namespace srvscan {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string to_hex(const U256& v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    if (v == 0) return "0x0";
    std::string out;
    U256 x = v;
    while (x != 0) {
        out.push_back(kDigits[static_cast<unsigned>(x & 0xf)]);
        x >>= 4;
    }
    out += "x0";
    std::reverse(out.begin(), out.end());
    return out;
}

std::optional<U256> parse_u256_hex(std::string_view text) {
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
    if (text.empty()) return std::nullopt;
    while (text.size() > 1 && text.front() == '0') text.remove_prefix(1);
    if (text.size() > 64) return std::nullopt;
    U256 v = 0;
    for (char c : text) {
        int d = hex_digit(c);
        if (d < 0) return std::nullopt;
        v = (v << 4) | U256(d);
    }
    return v;
}

U256 u256_from_be(std::span<const std::uint8_t> bytes) {
    U256 v = 0;
    for (auto b : bytes.first(std::min<std::size_t>(bytes.size(), 32))) v = (v << 8) | U256(b);
    return v;
}

bool fits_bits(const U256& v, unsigned width) {
    if (width >= 256) return true;
    return (v >> width) == 0;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io: return "Io";
        case ErrorCode::MalformedJson: return "MalformedJson";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::TruncatedPush: return "TruncatedPush";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::DuplicateOrderKey: return "DuplicateOrderKey";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InconsistentInputs: return "InconsistentInputs";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::UnknownVar: return "UnknownVar";
        case ErrorCode::UnknownFunction: return "UnknownFunction";
        case ErrorCode::MissingExpectation: return "MissingExpectation";
        case ErrorCode::MissingFixture: return "MissingFixture";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace srvscan
