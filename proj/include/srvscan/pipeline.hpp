// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// End-to-end analysis of one contract, report rendering and the corpus runner.

#pragma once

#include "srvscan/deps.hpp"
#include "srvscan/detector.hpp"
#include "srvscan/evm.hpp"
#include "srvscan/fsm.hpp"
#include "srvscan/model.hpp"
#include "srvscan/sdg.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace srvscan {

enum class InputKind : std::uint8_t { Bytecode, Model };

struct AnalysisConfig {
    InputKind kind = InputKind::Model;
    /// Hex or raw bytecode, or model JSON text.
    std::string input;
    std::optional<std::string> traces_jsonl;
    unsigned fsm_k = 2;
    std::uint64_t min_support = 1;
    std::chrono::milliseconds timeout{600'000};
    bool use_tsd = true;
};

/// Everything the pipeline produced; stages after a timeout are absent.
struct AnalysisResult {
    std::optional<evm::FrontendResult> frontend;
    std::optional<ContractModel> model;
    std::vector<RwEdge> rw;
    std::vector<AsdEdge> asd;
    std::optional<Fsm> fsm;
    std::vector<TsdEdge> tsd;
    std::optional<Sdg> sdg;
    std::optional<Detection> detection;
    std::vector<evm::LiftWarning> lift_warnings;
    std::vector<std::string> notes;
    bool timed_out = false;

    bool has_findings() const { return detection && !detection->findings.empty(); }
};

/// Throws Error for bad input; a timeout is reported through `timed_out`.
AnalysisResult run_analysis(const AnalysisConfig& cfg);

/// Trace labels given as 0x-selectors become model function names where one matches.
void map_trace_selectors(std::vector<TransactionTrace>& traces, const ContractModel& m);

std::string report_json(const AnalysisResult& r);
std::string report_text(const AnalysisResult& r);

/// 0 clean, 2 findings, 3 timeout.
int exit_code_for(const AnalysisResult& r);

struct CorpusOptions {
    unsigned jobs = 1;
    std::chrono::milliseconds timeout{600'000};
};

struct CorpusSummary {
    std::string json;
    bool all_passed = true;
};

/// Each fixture is `<name>.model.json` or `<name>.hex`, with optional
/// `<name>.traces.jsonl`. Throws Error{MissingExpectation | MissingFixture | Io}.
CorpusSummary run_corpus(const std::string& dir, const std::string& expected_json, const CorpusOptions& opts = {});

}  // namespace srvscan
