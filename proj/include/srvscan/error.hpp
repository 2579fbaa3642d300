// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <stdexcept>
#include <string>

namespace srvscan {

enum class ErrorCode {
    Io,
    MalformedJson,
    SchemaViolation,
    TruncatedPush,
    MalformedLine,
    DuplicateOrderKey,
    EmptyInput,
    InconsistentInputs,
    UnknownNode,
    UnknownVar,
    UnknownFunction,
    MissingExpectation,
    MissingFixture,
    Timeout,
    InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Every failure the library reports is an Error carrying a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace srvscan
