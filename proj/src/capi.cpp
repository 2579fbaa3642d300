// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/srvscan.h"

#include "srvscan/pipeline.hpp"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>

struct srv_config {
    std::optional<srvscan::InputKind> kind;
    srvscan::AnalysisConfig cfg;
};

struct srv_result {
    srvscan::AnalysisResult result;
};

namespace {

thread_local std::string g_last_error;

srv_status to_status(srvscan::ErrorCode c) {
    using srvscan::ErrorCode;
    switch (c) {
        case ErrorCode::Io: return SRV_ERR_IO;
        case ErrorCode::MalformedJson: return SRV_ERR_MALFORMED_JSON;
        case ErrorCode::SchemaViolation: return SRV_ERR_SCHEMA_VIOLATION;
        case ErrorCode::TruncatedPush: return SRV_ERR_TRUNCATED_PUSH;
        case ErrorCode::MalformedLine: return SRV_ERR_MALFORMED_LINE;
        case ErrorCode::DuplicateOrderKey: return SRV_ERR_DUPLICATE_ORDER_KEY;
        case ErrorCode::EmptyInput: return SRV_ERR_EMPTY_INPUT;
        case ErrorCode::InconsistentInputs: return SRV_ERR_INCONSISTENT_INPUTS;
        case ErrorCode::UnknownNode: return SRV_ERR_UNKNOWN_NODE;
        case ErrorCode::UnknownVar: return SRV_ERR_UNKNOWN_VAR;
        case ErrorCode::UnknownFunction: return SRV_ERR_UNKNOWN_FUNCTION;
        case ErrorCode::MissingExpectation: return SRV_ERR_MISSING_EXPECTATION;
        case ErrorCode::MissingFixture: return SRV_ERR_MISSING_FIXTURE;
        case ErrorCode::Timeout: return SRV_ERR_TIMEOUT;
        case ErrorCode::InvalidArgument: return SRV_ERR_INVALID_ARGUMENT;
    }
    return SRV_ERR_INTERNAL;
}

srv_status fail(srv_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

template <typename F>
srv_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const srvscan::Error& e) {
        return fail(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(SRV_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SRV_ERR_INTERNAL, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.data(), s.size() + 1);
    return p;
}

srv_status null_arg(const char* what) { return fail(SRV_ERR_INVALID_ARGUMENT, std::string(what) + " is null"); }

}  // namespace

extern "C" {

const char* srv_version(void) { return "0.1.0"; }

const char* srv_status_name(srv_status s) {
    switch (s) {
        case SRV_OK: return "OK";
        case SRV_ERR_INTERNAL: return "Internal";
        default: return srvscan::error_code_name(static_cast<srvscan::ErrorCode>(s - 1));
    }
}

const char* srv_last_error(void) { return g_last_error.c_str(); }

void srv_string_free(char* s) { std::free(s); }

srv_config* srv_config_new(void) {
    try {
        return new srv_config{};
    } catch (...) {
        return nullptr;
    }
}

void srv_config_free(srv_config* cfg) { delete cfg; }

static srv_status set_input(srv_config* cfg, srvscan::InputKind kind, const char* data, size_t len) {
    if (!cfg) return null_arg("config");
    if (!data && len) return null_arg("input");
    if (cfg->kind && *cfg->kind != kind)
        return fail(SRV_ERR_INVALID_ARGUMENT, "bytecode and model inputs are mutually exclusive");
    return guarded([&] {
        cfg->kind = kind;
        cfg->cfg.kind = kind;
        cfg->cfg.input.assign(data ? data : "", len);
        return SRV_OK;
    });
}

srv_status srv_config_set_bytecode(srv_config* cfg, const char* data, size_t len) {
    return set_input(cfg, srvscan::InputKind::Bytecode, data, len);
}

srv_status srv_config_set_model_json(srv_config* cfg, const char* json, size_t len) {
    return set_input(cfg, srvscan::InputKind::Model, json, len);
}

srv_status srv_config_set_traces_jsonl(srv_config* cfg, const char* jsonl, size_t len) {
    if (!cfg) return null_arg("config");
    if (!jsonl && len) return null_arg("traces");
    return guarded([&] {
        cfg->cfg.traces_jsonl = std::string(jsonl ? jsonl : "", len);
        return SRV_OK;
    });
}

srv_status srv_config_set_fsm_k(srv_config* cfg, uint32_t k) {
    if (!cfg) return null_arg("config");
    if (k == 0) return fail(SRV_ERR_INVALID_ARGUMENT, "fsm k must be positive");
    cfg->cfg.fsm_k = k;
    return SRV_OK;
}

srv_status srv_config_set_min_support(srv_config* cfg, uint64_t n) {
    if (!cfg) return null_arg("config");
    if (n == 0) return fail(SRV_ERR_INVALID_ARGUMENT, "min support must be positive");
    cfg->cfg.min_support = n;
    return SRV_OK;
}

srv_status srv_config_set_timeout_ms(srv_config* cfg, uint64_t ms) {
    if (!cfg) return null_arg("config");
    if (ms == 0) return fail(SRV_ERR_INVALID_ARGUMENT, "timeout must be positive");
    cfg->cfg.timeout = std::chrono::milliseconds(ms);
    return SRV_OK;
}

srv_status srv_config_set_use_tsd(srv_config* cfg, int enabled) {
    if (!cfg) return null_arg("config");
    cfg->cfg.use_tsd = enabled != 0;
    return SRV_OK;
}

srv_status srv_analyze(const srv_config* cfg, srv_result** out) {
    if (!cfg) return null_arg("config");
    if (!out) return null_arg("out");
    *out = nullptr;
    if (!cfg->kind) return fail(SRV_ERR_INVALID_ARGUMENT, "no input set");
    return guarded([&] {
        auto r = std::make_unique<srv_result>();
        r->result = srvscan::run_analysis(cfg->cfg);
        const bool timed_out = r->result.timed_out;
        *out = r.release();
        if (timed_out) return fail(SRV_ERR_TIMEOUT, "analysis budget exhausted");
        return SRV_OK;
    });
}

void srv_result_free(srv_result* r) { delete r; }

size_t srv_result_finding_count(const srv_result* r) {
    return r && r->result.detection ? r->result.detection->findings.size() : 0;
}

int srv_result_timed_out(const srv_result* r) { return r && r->result.timed_out ? 1 : 0; }

int srv_result_exit_code(const srv_result* r) { return r ? srvscan::exit_code_for(r->result) : 1; }

srv_status srv_result_report(const srv_result* r, srv_format fmt, char** out) {
    if (!r) return null_arg("result");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = dup_string(fmt == SRV_FORMAT_TEXT ? srvscan::report_text(r->result) : srvscan::report_json(r->result));
        return SRV_OK;
    });
}

srv_status srv_result_dump(const srv_result* r, srv_dump kind, char** out) {
    if (!r) return null_arg("result");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        const auto& a = r->result;
        auto unavailable = [](const char* what) { return fail(SRV_ERR_INVALID_ARGUMENT, std::string(what) + " not available"); };
        std::string s;
        switch (kind) {
            case SRV_DUMP_DISASM:
                if (!a.frontend) return unavailable("disassembly (bytecode input only)");
                s = srvscan::evm::format_listing(a.frontend->instructions);
                break;
            case SRV_DUMP_CFG:
                if (!a.frontend) return unavailable("CFG (bytecode input only)");
                s = srvscan::evm::cfg_to_dot(a.frontend->cfg);
                break;
            case SRV_DUMP_MODEL:
                if (!a.model) return unavailable("model");
                s = srvscan::save_model(*a.model);
                break;
            case SRV_DUMP_ASD:
                if (!a.model) return unavailable("ASD");
                s = srvscan::asd_to_json(*a.model, a.asd);
                break;
            case SRV_DUMP_FSM:
                if (!a.fsm) return unavailable("FSM (no traces)");
                s = srvscan::fsm_to_dot(*a.fsm);
                break;
            case SRV_DUMP_TSD:
                s = srvscan::tsd_to_json(a.tsd);
                break;
            case SRV_DUMP_SDG_DOT:
                if (!a.sdg) return unavailable("SDG");
                s = srvscan::sdg_to_dot(*a.sdg);
                break;
            case SRV_DUMP_SDG_JSON:
                if (!a.sdg) return unavailable("SDG");
                s = srvscan::sdg_to_json(*a.sdg);
                break;
            default:
                return fail(SRV_ERR_INVALID_ARGUMENT, "unknown dump kind");
        }
        *out = dup_string(s);
        return SRV_OK;
    });
}

srv_status srv_disassemble(const char* data, size_t len, char** out) {
    if (!data && len) return null_arg("input");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto bytes = srvscan::evm::decode_code_input(std::string_view(data ? data : "", len));
        const auto image = srvscan::evm::prepare_runtime(bytes);
        *out = dup_string(srvscan::evm::format_listing(srvscan::evm::disassemble(image.runtime)));
        return SRV_OK;
    });
}

srv_status srv_sdg_dot(const char* model_json, size_t len, char** out) {
    if (!model_json && len) return null_arg("model");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto m = srvscan::load_model(std::string_view(model_json ? model_json : "", len));
        const auto g = srvscan::build_sdg(m, srvscan::extract_rw(m), srvscan::extract_asd(m), {});
        *out = dup_string(srvscan::sdg_to_dot(g));
        return SRV_OK;
    });
}

srv_status srv_run_corpus(const char* dir, const char* expected_json, size_t len, uint32_t jobs, uint64_t timeout_ms,
                          char** summary, int* all_passed) {
    if (!dir) return null_arg("dir");
    if (!expected_json && len) return null_arg("expectations");
    if (!summary) return null_arg("summary");
    if (timeout_ms == 0) return fail(SRV_ERR_INVALID_ARGUMENT, "timeout must be positive");
    return guarded([&] {
        srvscan::CorpusOptions opts;
        opts.jobs = jobs ? jobs : 1;
        opts.timeout = std::chrono::milliseconds(timeout_ms);
        auto s = srvscan::run_corpus(dir, std::string(expected_json ? expected_json : "", len), opts);
        *summary = dup_string(s.json);
        if (all_passed) *all_passed = s.all_passed ? 1 : 0;
        return SRV_OK;
    });
}

}  // extern "C"
