// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Read/write and assertion-related state dependencies over a ContractModel.

#pragma once

#include "srvscan/model.hpp"

#include <string>
#include <vector>

namespace srvscan {

enum class AccessMode : std::uint8_t { Read, Write };

struct RwEdge {
    std::string accessor;
    VarKey var;
    AccessMode mode = AccessMode::Read;
    StmtPath site;
    /// The site is an Assert (the read is part of its condition).
    bool in_assert = false;

    friend bool operator==(const RwEdge&, const RwEdge&) = default;
};

/// One edge per (function, statement, var, mode). Order: function order, then
/// pre-order statement path; within a statement the write precedes reads.
std::vector<RwEdge> extract_rw(const ContractModel& m);

/// e_r(reader, writer): `reader` asserts on `var`, which `writer` writes.
struct AsdEdge {
    std::string reader;
    std::string writer;
    VarKey var;
    /// First Assert in the reader whose condition reads `var`.
    StmtPath assert_site;

    friend bool operator==(const AsdEdge&, const AsdEdge&) = default;
};

/// Distinct (reader, writer, var) triples ordered by reader, assert site,
/// var occurrence, then writer in model order. Self edges are kept.
std::vector<AsdEdge> extract_asd(const ContractModel& m);

/// `[{"reader","writer","var","site"}]`
std::string asd_to_json(const ContractModel& m, const std::vector<AsdEdge>& edges);

}  // namespace srvscan
