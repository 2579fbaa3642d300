// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Command-line driver. Talks to the library only through srvscan.h.

#include "srvscan/srvscan.h"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitError = 1;

struct Failure {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{"cannot read " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_out(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << data)) throw Failure{"cannot write " + path};
}

void check(srv_status s) {
    if (s != SRV_OK) throw Failure{std::string(srv_status_name(s)) + ": " + srv_last_error()};
}

struct CString {
    char* p = nullptr;
    ~CString() { srv_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("srvscan");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("SRV_SCAN_LOG")) {
        const auto level = spdlog::level::from_str(lvl);
        if (level != spdlog::level::off || std::string(lvl) == "off") spdlog::set_level(level);
    }
}

struct AnalyzeArgs {
    std::string bytecode, model, traces, out;
    std::string format = "json";
    std::uint64_t timeout_secs = 600;
    std::uint32_t fsm_k = 2;
    std::uint64_t min_support = 1;
    bool no_tsd = false;
    std::string dump_disasm, dump_cfg, dump_model, dump_sdg, dump_sdg_json, dump_fsm, dump_asd, dump_tsd;
};

int run_analyze(const AnalyzeArgs& a) {
    std::unique_ptr<srv_config, decltype(&srv_config_free)> cfg(srv_config_new(), srv_config_free);
    if (!cfg) throw Failure{"out of memory"};
    if (!a.bytecode.empty()) {
        const auto data = read_file(a.bytecode);
        spdlog::info("bytecode input {} ({} bytes)", a.bytecode, data.size());
        check(srv_config_set_bytecode(cfg.get(), data.data(), data.size()));
    } else {
        const auto data = read_file(a.model);
        spdlog::info("model input {}", a.model);
        check(srv_config_set_model_json(cfg.get(), data.data(), data.size()));
    }
    if (!a.traces.empty()) {
        const auto data = read_file(a.traces);
        spdlog::info("traces {}", a.traces);
        check(srv_config_set_traces_jsonl(cfg.get(), data.data(), data.size()));
    }
    check(srv_config_set_fsm_k(cfg.get(), a.fsm_k));
    check(srv_config_set_min_support(cfg.get(), a.min_support));
    check(srv_config_set_timeout_ms(cfg.get(), a.timeout_secs * 1000));
    check(srv_config_set_use_tsd(cfg.get(), a.no_tsd ? 0 : 1));

    srv_result* raw = nullptr;
    const srv_status st = srv_analyze(cfg.get(), &raw);
    std::unique_ptr<srv_result, decltype(&srv_result_free)> res(raw, srv_result_free);
    if (st == SRV_ERR_TIMEOUT) spdlog::warn("timeout after {} s; report is partial", a.timeout_secs);
    else check(st);

    const std::pair<const std::string*, srv_dump> dumps[] = {
        {&a.dump_disasm, SRV_DUMP_DISASM}, {&a.dump_cfg, SRV_DUMP_CFG},       {&a.dump_model, SRV_DUMP_MODEL},
        {&a.dump_sdg, SRV_DUMP_SDG_DOT},   {&a.dump_sdg_json, SRV_DUMP_SDG_JSON}, {&a.dump_fsm, SRV_DUMP_FSM},
        {&a.dump_asd, SRV_DUMP_ASD},       {&a.dump_tsd, SRV_DUMP_TSD},
    };
    for (const auto& [path, kind] : dumps) {
        if (path->empty()) continue;
        CString s;
        if (srv_result_dump(res.get(), kind, &s.p) != SRV_OK) {
            spdlog::warn("skipping dump {}: {}", *path, srv_last_error());
            continue;
        }
        write_out(*path, s.str());
    }

    CString report;
    check(srv_result_report(res.get(), a.format == "text" ? SRV_FORMAT_TEXT : SRV_FORMAT_JSON, &report.p));
    write_out(a.out, report.str());
    spdlog::info("{} finding(s)", srv_result_finding_count(res.get()));
    return srv_result_exit_code(res.get());
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"srvscan: detect state-reverting vulnerabilities in EVM contracts"};
    app.set_version_flag("--version", std::string(srv_version()));
    app.require_subcommand(1);

    AnalyzeArgs a;
    auto* analyze = app.add_subcommand("analyze", "Analyze one contract");
    auto* in_bc = analyze->add_option("--bytecode", a.bytecode, "Runtime or creation bytecode (hex or binary)");
    auto* in_model = analyze->add_option("--model", a.model, "Contract model JSON");
    in_bc->excludes(in_model);
    analyze->add_option("--traces", a.traces, "Transaction trace file (JSON Lines)");
    analyze->add_option("--format", a.format, "Report format")->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--timeout-secs", a.timeout_secs, "Wall-clock budget")->check(CLI::PositiveNumber);
    analyze->add_option("--fsm-k", a.fsm_k, "k-tail horizon for state merging")->check(CLI::PositiveNumber);
    analyze->add_option("--min-support", a.min_support, "Minimum trace support for TSD edges")->check(CLI::PositiveNumber);
    analyze->add_option("--out", a.out, "Report destination (default stdout)");
    analyze->add_flag("--no-tsd", a.no_tsd, "Ignore temporal dependencies during taint propagation");
    analyze->add_option("--dump-disasm", a.dump_disasm, "Write the disassembly listing");
    analyze->add_option("--dump-cfg", a.dump_cfg, "Write the CFG (DOT)");
    analyze->add_option("--dump-model", a.dump_model, "Write the (lifted) model JSON");
    analyze->add_option("--dump-sdg", a.dump_sdg, "Write the SDG (DOT)");
    analyze->add_option("--dump-sdg-json", a.dump_sdg_json, "Write the SDG (JSON)");
    analyze->add_option("--dump-fsm", a.dump_fsm, "Write the merged FSM (DOT)");
    analyze->add_option("--dump-asd", a.dump_asd, "Write ASD edges (JSON)");
    analyze->add_option("--dump-tsd", a.dump_tsd, "Write TSD edges (JSON)");

    std::string disasm_file;
    auto* disasm = app.add_subcommand("disasm", "Print a disassembly listing");
    disasm->add_option("file", disasm_file, "Bytecode file")->required();

    std::string sdg_model, sdg_dot;
    auto* sdg = app.add_subcommand("sdg", "Export the dependency graph of a model");
    sdg->add_option("--model", sdg_model, "Contract model JSON")->required();
    sdg->add_option("--dot", sdg_dot, "DOT destination")->required();

    std::string corpus_dir, corpus_expected, corpus_out;
    std::uint32_t jobs = 1;
    std::uint64_t corpus_timeout = 600;
    auto* corpus = app.add_subcommand("corpus", "Run a fixture corpus against expectations");
    corpus->add_option("dir", corpus_dir, "Fixture directory")->required();
    corpus->add_option("--expected", corpus_expected, "Expectation JSON")->required();
    corpus->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    corpus->add_option("--timeout-secs", corpus_timeout, "Per-contract budget")->check(CLI::PositiveNumber);
    corpus->add_option("--out", corpus_out, "Summary destination (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            if (a.bytecode.empty() && a.model.empty()) throw Failure{"analyze needs --bytecode or --model"};
            return run_analyze(a);
        }
        if (*disasm) {
            const auto data = read_file(disasm_file);
            CString s;
            check(srv_disassemble(data.data(), data.size(), &s.p));
            std::cout << s.str();
            return 0;
        }
        if (*sdg) {
            const auto data = read_file(sdg_model);
            CString s;
            check(srv_sdg_dot(data.data(), data.size(), &s.p));
            write_out(sdg_dot, s.str());
            return 0;
        }
        if (*corpus) {
            const auto expected = read_file(corpus_expected);
            CString s;
            int passed = 0;
            check(srv_run_corpus(corpus_dir.c_str(), expected.data(), expected.size(), jobs, corpus_timeout * 1000, &s.p,
                                 &passed));
            write_out(corpus_out, s.str());
            if (!passed) spdlog::error("corpus mismatch");
            return passed ? 0 : 2;
        }
    } catch (const Failure& f) {
        spdlog::error("{}", f.message);
        return kExitError;
    }
    return kExitError;
}
