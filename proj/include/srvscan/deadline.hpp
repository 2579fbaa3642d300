// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "srvscan/error.hpp"

#include <chrono>
#include <optional>

namespace srvscan {

/// Cooperative wall-clock budget. Long-running loops call check().
class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;
    explicit Deadline(std::chrono::milliseconds budget) : at_(Clock::now() + budget) {}

    bool expired() const { return at_ && Clock::now() >= *at_; }

    void check() const {
        if (expired()) throw Error(ErrorCode::Timeout, "analysis budget exhausted");
    }

    static const Deadline& none() {
        static const Deadline unlimited;
        return unlimited;
    }

private:
    std::optional<Clock::time_point> at_;
};

}  // namespace srvscan
