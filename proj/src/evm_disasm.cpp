// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/error.hpp"
#include "srvscan/evm.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <string>

namespace srvscan::evm {

namespace {

struct OpRow {
    std::uint8_t code;
    const char* name;
    std::uint8_t pops;
    std::uint8_t pushes;
};

constexpr OpRow kRows[] = {
    {0x00, "STOP", 0, 0},         {0x01, "ADD", 2, 1},          {0x02, "MUL", 2, 1},
    {0x03, "SUB", 2, 1},          {0x04, "DIV", 2, 1},          {0x05, "SDIV", 2, 1},
    {0x06, "MOD", 2, 1},          {0x07, "SMOD", 2, 1},         {0x08, "ADDMOD", 3, 1},
    {0x09, "MULMOD", 3, 1},       {0x0a, "EXP", 2, 1},          {0x0b, "SIGNEXTEND", 2, 1},
    {0x10, "LT", 2, 1},           {0x11, "GT", 2, 1},           {0x12, "SLT", 2, 1},
    {0x13, "SGT", 2, 1},          {0x14, "EQ", 2, 1},           {0x15, "ISZERO", 1, 1},
    {0x16, "AND", 2, 1},          {0x17, "OR", 2, 1},           {0x18, "XOR", 2, 1},
    {0x19, "NOT", 1, 1},          {0x1a, "BYTE", 2, 1},         {0x1b, "SHL", 2, 1},
    {0x1c, "SHR", 2, 1},          {0x1d, "SAR", 2, 1},          {0x20, "KECCAK256", 2, 1},
    {0x30, "ADDRESS", 0, 1},      {0x31, "BALANCE", 1, 1},      {0x32, "ORIGIN", 0, 1},
    {0x33, "CALLER", 0, 1},       {0x34, "CALLVALUE", 0, 1},    {0x35, "CALLDATALOAD", 1, 1},
    {0x36, "CALLDATASIZE", 0, 1}, {0x37, "CALLDATACOPY", 3, 0}, {0x38, "CODESIZE", 0, 1},
    {0x39, "CODECOPY", 3, 0},     {0x3a, "GASPRICE", 0, 1},     {0x3b, "EXTCODESIZE", 1, 1},
    {0x3c, "EXTCODECOPY", 4, 0},  {0x3d, "RETURNDATASIZE", 0, 1}, {0x3e, "RETURNDATACOPY", 3, 0},
    {0x3f, "EXTCODEHASH", 1, 1},  {0x40, "BLOCKHASH", 1, 1},    {0x41, "COINBASE", 0, 1},
    {0x42, "TIMESTAMP", 0, 1},    {0x43, "NUMBER", 0, 1},       {0x44, "PREVRANDAO", 0, 1},
    {0x45, "GASLIMIT", 0, 1},     {0x46, "CHAINID", 0, 1},      {0x47, "SELFBALANCE", 0, 1},
    {0x48, "BASEFEE", 0, 1},      {0x49, "BLOBHASH", 1, 1},     {0x4a, "BLOBBASEFEE", 0, 1},
    {0x50, "POP", 1, 0},          {0x51, "MLOAD", 1, 1},        {0x52, "MSTORE", 2, 0},
    {0x53, "MSTORE8", 2, 0},      {0x54, "SLOAD", 1, 1},        {0x55, "SSTORE", 2, 0},
    {0x56, "JUMP", 1, 0},         {0x57, "JUMPI", 2, 0},        {0x58, "PC", 0, 1},
    {0x59, "MSIZE", 0, 1},        {0x5a, "GAS", 0, 1},          {0x5b, "JUMPDEST", 0, 0},
    {0x5c, "TLOAD", 1, 1},        {0x5d, "TSTORE", 2, 0},       {0x5e, "MCOPY", 3, 0},
    {0xf0, "CREATE", 3, 1},       {0xf1, "CALL", 7, 1},         {0xf2, "CALLCODE", 7, 1},
    {0xf3, "RETURN", 2, 0},       {0xf4, "DELEGATECALL", 6, 1}, {0xf5, "CREATE2", 4, 1},
    {0xfa, "STATICCALL", 6, 1},   {0xfd, "REVERT", 2, 0},       {0xfe, "INVALID", 0, 0},
    {0xff, "SELFDESTRUCT", 1, 0},
};

constexpr const char* kPushNames[] = {
    "PUSH0",  "PUSH1",  "PUSH2",  "PUSH3",  "PUSH4",  "PUSH5",  "PUSH6",  "PUSH7",  "PUSH8",  "PUSH9",  "PUSH10",
    "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16", "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21",
    "PUSH22", "PUSH23", "PUSH24", "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
constexpr const char* kDupNames[] = {"DUP1", "DUP2",  "DUP3",  "DUP4",  "DUP5",  "DUP6",  "DUP7",  "DUP8",
                                     "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16"};
constexpr const char* kSwapNames[] = {"SWAP1",  "SWAP2",  "SWAP3",  "SWAP4",  "SWAP5",  "SWAP6",
                                      "SWAP7",  "SWAP8",  "SWAP9",  "SWAP10", "SWAP11", "SWAP12",
                                      "SWAP13", "SWAP14", "SWAP15", "SWAP16"};
constexpr const char* kLogNames[] = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};

std::array<OpInfo, 256> build_table() {
    std::array<OpInfo, 256> t{};
    for (const auto& r : kRows) t[r.code] = OpInfo{r.name, 0, r.pops, r.pushes, true};
    for (int i = 0; i <= 32; ++i)
        t[0x5f + i] = OpInfo{kPushNames[i], static_cast<std::uint8_t>(i), 0, 1, true};
    for (int i = 0; i < 16; ++i) {
        t[0x80 + i] = OpInfo{kDupNames[i], 0, static_cast<std::uint8_t>(i + 1), static_cast<std::uint8_t>(i + 2), true};
        t[0x90 + i] = OpInfo{kSwapNames[i], 0, static_cast<std::uint8_t>(i + 2), static_cast<std::uint8_t>(i + 2), true};
    }
    for (int i = 0; i <= 4; ++i) t[0xa0 + i] = OpInfo{kLogNames[i], 0, static_cast<std::uint8_t>(i + 2), 0, true};
    return t;
}

const std::array<OpInfo, 256>& table() {
    static const std::array<OpInfo, 256> t = build_table();
    return t;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string hex_bytes(std::span<const std::uint8_t> b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s = "0x";
    for (auto v : b) {
        s.push_back(digits[v >> 4]);
        s.push_back(digits[v & 0xf]);
    }
    return s;
}

// CBOR map header byte followed by a text-string key solc is known to emit.
bool looks_like_metadata(std::span<const std::uint8_t> m) {
    if (m.size() < 2) return false;
    if ((m[0] & 0xe0) != 0xa0) return false;
    if ((m[1] & 0xe0) != 0x60) return false;
    std::size_t klen = m[1] & 0x1f;
    if (m.size() < 2 + klen) return false;
    std::string key(m.begin() + 2, m.begin() + 2 + static_cast<std::ptrdiff_t>(klen));
    return key == "ipfs" || key == "bzzr0" || key == "bzzr1" || key == "solc" || key == "experimental";
}

}  // namespace

const OpInfo& op_info(std::uint8_t opcode) { return table()[opcode]; }

std::string Instruction::mnemonic() const {
    const auto& info = op_info(opcode);
    if (info.defined) return std::string(info.mnemonic);
    char buf[16];
    std::snprintf(buf, sizeof buf, "UNKNOWN_0x%02x", opcode);
    return buf;
}

std::size_t metadata_length(std::span<const std::uint8_t> code) {
    if (code.size() < 2) return 0;
    std::size_t len = (static_cast<std::size_t>(code[code.size() - 2]) << 8) | code[code.size() - 1];
    if (len == 0 || len + 2 > code.size()) return 0;
    auto meta = code.subspan(code.size() - 2 - len, len);
    return looks_like_metadata(meta) ? len + 2 : 0;
}

std::vector<Instruction> disassemble_raw(std::span<const std::uint8_t> code, bool lenient) {
    std::vector<Instruction> out;
    std::size_t pc = 0;
    while (pc < code.size()) {
        Instruction ins;
        ins.offset = pc;
        ins.opcode = code[pc];
        std::size_t width = op_info(ins.opcode).immediate;
        if (pc + 1 + width > code.size()) {
            if (lenient) break;
            throw Error(ErrorCode::TruncatedPush, "truncated PUSH immediate at offset " + std::to_string(pc));
        }
        ins.immediate.assign(code.begin() + static_cast<std::ptrdiff_t>(pc + 1),
                             code.begin() + static_cast<std::ptrdiff_t>(pc + 1 + width));
        pc += 1 + width;
        out.push_back(std::move(ins));
    }
    return out;
}

std::vector<Instruction> disassemble(std::span<const std::uint8_t> code) {
    return disassemble_raw(code.first(code.size() - metadata_length(code)));
}

std::vector<std::uint8_t> assemble(std::span<const Instruction> instrs) {
    std::vector<std::uint8_t> out;
    for (const auto& i : instrs) {
        out.push_back(i.opcode);
        out.insert(out.end(), i.immediate.begin(), i.immediate.end());
    }
    return out;
}

std::string format_listing(std::span<const Instruction> instrs) {
    std::string out;
    char buf[32];
    for (const auto& i : instrs) {
        std::snprintf(buf, sizeof buf, "0x%04zx: ", i.offset);
        out += buf;
        out += i.mnemonic();
        if (!i.immediate.empty()) {
            out += ' ';
            out += hex_bytes(i.immediate);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::uint8_t> decode_code_input(std::string_view content) {
    std::string digits;
    digits.reserve(content.size());
    bool textual = true;
    std::size_t i = 0;
    while (i < content.size() && std::isspace(static_cast<unsigned char>(content[i]))) ++i;
    if (content.substr(i, 2) == "0x" || content.substr(i, 2) == "0X") i += 2;
    for (; i < content.size(); ++i) {
        char c = content[i];
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (hex_value(c) < 0) {
            textual = false;
            break;
        }
        digits.push_back(c);
    }
    if (textual && digits.size() % 2 == 0) {
        std::vector<std::uint8_t> out(digits.size() / 2);
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = static_cast<std::uint8_t>(hex_value(digits[2 * k]) * 16 + hex_value(digits[2 * k + 1]));
        return out;
    }
    return {content.begin(), content.end()};
}

CodeImage prepare_runtime(std::span<const std::uint8_t> code) {
    CodeImage img;
    // Constructor shape: PUSH len DUP1 PUSH off PUSH0|PUSH1 0 CODECOPY ... RETURN, with the
    // copied segment running to the end of the code (possibly followed by metadata).
    auto instrs = disassemble_raw(code, true);
    for (std::size_t k = 0; k + 1 < instrs.size() && k < 64; ++k) {
        if (instrs[k].opcode != op::CODECOPY) continue;
        // Stack before CODECOPY, top first: destOffset, offset, size. Evaluate the preceding
        // straight-line pushes/dups concretely.
        std::vector<std::optional<U256>> st;
        bool ok = true;
        for (std::size_t j = 0; j < k && ok; ++j) {
            const auto& in = instrs[j];
            if (in.is_push()) {
                st.emplace_back(in.push_value());
            } else if (in.opcode >= op::DUP1 && in.opcode <= op::DUP16) {
                std::size_t n = in.opcode - op::DUP1 + 1;
                if (st.size() < n) ok = false;
                else st.push_back(st[st.size() - n]);
            } else if (in.opcode >= op::SWAP1 && in.opcode <= op::SWAP16) {
                std::size_t n = in.opcode - op::SWAP1 + 1;
                if (st.size() < n + 1) ok = false;
                else std::swap(st.back(), st[st.size() - 1 - n]);
            } else if (in.opcode == op::JUMPDEST) {
            } else {
                const auto& info = op_info(in.opcode);
                if (!info.defined || in.opcode == op::JUMP) ok = false;
                for (int p = 0; ok && p < info.pops; ++p) {
                    if (st.empty()) break;
                    st.pop_back();
                }
                for (int p = 0; ok && p < info.pushes; ++p) st.emplace_back(std::nullopt);
            }
        }
        if (!ok || st.size() < 3) break;
        auto dest = st[st.size() - 1], off = st[st.size() - 2], size = st[st.size() - 3];
        if (!dest || !off || !size || *dest != 0) break;
        bool returns = false;
        for (std::size_t j = k + 1; j < instrs.size() && j < k + 8; ++j)
            if (instrs[j].opcode == op::RETURN) returns = true;
        if (!returns || *off == 0 || *off >= code.size() || !fits_bits(*size, 32)) break;
        std::size_t o = low_u64(*off), n = low_u64(*size);
        if (o + n > code.size()) break;
        img.runtime.assign(code.begin() + static_cast<std::ptrdiff_t>(o),
                           code.begin() + static_cast<std::ptrdiff_t>(o + n));
        img.from_creation = true;
        break;
    }
    if (!img.from_creation) img.runtime.assign(code.begin(), code.end());
    img.metadata_bytes = metadata_length(img.runtime);
    img.runtime.resize(img.runtime.size() - img.metadata_bytes);
    return img;
}

}  // namespace srvscan::evm
